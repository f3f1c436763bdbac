#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "qball/error.hpp"
#include "qball/experiments.hpp"

namespace qball {

namespace {

struct Target {
  const char* name;
  const char* description;
  ScenarioConfig (*make)();
};

ScenarioConfig base(ScenarioKind kind, int dim, const char* name) {
  ScenarioConfig c = default_config(kind, dim);
  c.name = name;
  return c;
}

ScenarioConfig stability(const char* name, std::vector<double> lambdas,
                         std::vector<double> velocities) {
  ScenarioConfig c = base(ScenarioKind::StabilityCurves, 1, name);
  c.lambdas = std::move(lambdas);
  c.velocities = std::move(velocities);
  return c;
}

ScenarioConfig rest(const char* name, std::vector<double> omegas,
                    std::vector<double> lambda0s, double x0 = -15.0) {
  ScenarioConfig c = base(ScenarioKind::RestRelease, 1, name);
  c.omegas = std::move(omegas);
  c.lambda0s = std::move(lambda0s);
  c.x0 = x0;
  return c;
}

ScenarioConfig sweep2d(const char* name, std::vector<double> omegas,
                       std::vector<double> velocities,
                       std::vector<double> lambda0s,
                       std::vector<double> impacts) {
  ScenarioConfig c = base(ScenarioKind::ImpactParameterSweep, 2, name);
  c.omegas = std::move(omegas);
  c.velocities = std::move(velocities);
  c.lambda0s = std::move(lambda0s);
  c.impacts = std::move(impacts);
  c.early_stop = false;
  return c;
}

ScenarioConfig hole_scatter(const char* name, std::vector<double> omegas,
                            std::vector<double> velocities, double lambda0) {
  ScenarioConfig c = base(ScenarioKind::HoleScatter, 1, name);
  c.omegas = std::move(omegas);
  c.velocities = std::move(velocities);
  c.lambda0s = {lambda0};
  return c;
}

const Target kTargets[] = {
    {"table1", "barrier 0.01 critical velocities for omega 1.5 to 1.9",
     [] {
       ScenarioConfig c = base(ScenarioKind::CriticalVelocitySearch, 1, "table1");
       c.omegas = {1.5, 1.6, 1.7, 1.8, 1.9};
       c.lambda0s = {0.01};
       return c;
     }},
    {"table2", "offspring counts for omega 1.9 released at x=-14 by holes",
     [] { return rest("table2", {1.9}, {-0.2, -0.3, -0.5, -0.6, -0.9}, -14.0); }},
    {"table3", "hole -0.1 critical velocities for omega 1.5 to 1.65",
     [] {
       ScenarioConfig c = base(ScenarioKind::CriticalVelocitySearch, 1, "table3");
       c.omegas = {1.5, 1.55, 1.6, 1.65};
       c.lambda0s = {-0.1};
       c.u_lo = 0.01;
       c.u_hi = 0.1;
       c.x0 = -15.0;
       c.t_end = 1500.0;
       return c;
     }},
    {"table4", "2D deflection angles against barrier 0.9 offsets",
     [] { return sweep2d("table4", {1.75}, {0.1}, {0.9}, {0, 3, 4, 5, 6, 7, 8, 10}); }},
    {"fig1", "E and Q against omega at rest",
     [] { return stability("fig1", {1.0}, {0.0}); }},
    {"fig2", "E/Q against omega for several speeds with the line m = 2",
     [] { return stability("fig2", {1.0}, {0.0, 0.1, 0.2, 0.3}); }},
    {"fig3", "omega 1.9 released at x=-15 next to barrier 0.01",
     [] { return rest("fig3", {1.9}, {0.01}); }},
    {"fig4", "stability line for barrier 0.1",
     [] { return stability("fig4", {1.1}, {0.0, 0.1, 0.2, 0.3}); }},
    {"fig5", "omega 1.5 and 1.9 released next to barrier 0.9",
     [] { return rest("fig5", {1.5, 1.9}, {0.9}); }},
    {"fig6", "omega 1.9 released next to barriers 0.5 and 0.9",
     [] { return rest("fig6", {1.9}, {0.5, 0.9}); }},
    {"fig7", "omega 1.9 released at x=-14 by hole -0.9",
     [] { return rest("fig7", {1.9}, {-0.9}, -14.0); }},
    {"fig8", "omega 1.5 released next to holes -0.5 and -0.9",
     [] { return rest("fig8", {1.5}, {-0.5, -0.9}); }},
    {"fig9", "omega 1.9 released next to hole -0.125",
     [] {
       ScenarioConfig c = rest("fig9", {1.9}, {-0.125});
       c.t_end = 400.0;
       return c;
     }},
    {"fig10", "omega 1.5 and 1.9 sent at 0.1 into hole -0.9",
     [] {
       ScenarioConfig c = hole_scatter("fig10", {1.5, 1.9}, {0.1}, -0.9);
       c.x0 = -20.0;
       c.t_end = 400.0;
       return c;
     }},
    {"fig11", "omega 1.5 at u=0.023 on hole -0.1",
     [] { return hole_scatter("fig11", {1.5}, {0.023}, -0.1); }},
    {"fig12", "omega 1.5 at u=0.025 on hole -0.1",
     [] { return hole_scatter("fig12", {1.5}, {0.025}, -0.1); }},
    {"fig13", "stability line for hole -0.1",
     [] { return stability("fig13", {0.9}, {0.0, 0.075, 0.1}); }},
    {"fig14", "shot 2D profiles for omega 1.5 to 1.9", nullptr},
    {"fig15", "2D trajectories against barrier 0.9 offsets",
     [] { return sweep2d("fig15", {1.75}, {0.1}, {0.9}, {0, 3, 4, 5, 6, 7, 8, 10}); }},
    {"fig16", "barriers 0.5 and 0.9 at offset 7",
     [] { return sweep2d("fig16", {1.75}, {0.1}, {0.5, 0.9}, {7}); }},
    {"fig17", "omega 1.75 and 1.9 against barrier 0.9 at offset 7",
     [] { return sweep2d("fig17", {1.75, 1.9}, {0.1}, {0.9}, {7}); }},
    {"fig18", "omega 1.6 at several speeds past hole -0.9 at offset 11.5",
     [] {
       ScenarioConfig c = sweep2d("fig18", {1.6}, {0.01, 0.05, 0.1}, {-0.9}, {11.5});
       c.t_end = 1500.0;
       return c;
     }},
    {"fig19", "omega 1.6 past hole -0.9 at offsets 10 to 11",
     [] { return sweep2d("fig19", {1.6}, {0.1}, {-0.9}, {10, 10.5, 11}); }},
    {"fig20", "omega 1.6 at u=0.2 past hole -0.9 at offset 8",
     [] { return sweep2d("fig20", {1.6}, {0.2}, {-0.9}, {8}); }},
    {"fig21", "omega 1.6 at u=0.05 and 0.2 past hole -0.9 at offset 8",
     [] {
       ScenarioConfig c = sweep2d("fig21", {1.6}, {0.05, 0.2}, {-0.9}, {8});
       c.t_end = 450.0;
       return c;
     }},
    {"fig22", "several omega at u=0.1 past hole -0.9 at offset 8.5",
     [] { return sweep2d("fig22", {1.5, 1.55, 1.6, 1.7, 1.9}, {0.1}, {-0.9}, {8.5}); }},
    {"two_hole", "omega 1.6 at u=0.1 between holes -0.9 at offsets +-11.5",
     [] {
       ScenarioConfig c = base(ScenarioKind::TwoHoleSymmetric, 2, "two_hole");
       c.velocities = {0.1};
       return c;
     }},
};

const Target& find_target(std::string_view name) {
  for (const auto& t : kTargets) {
    if (name == t.name) return t;
  }
  std::string known;
  for (const auto& t : kTargets) known += std::string(known.empty() ? "" : ", ") + t.name;
  throw Error(ErrorKind::Config,
              "unknown reproduce target '" + std::string(name) + "' (known: " + known + ")");
}

std::string export_profiles(const std::string& out_dir, const ProgressFn& progress) {
  namespace fs = std::filesystem;
  nlohmann::json summary;
  summary["target"] = "fig14";
  nlohmann::json rows = nlohmann::json::array();
  if (!out_dir.empty()) fs::create_directories(out_dir);
  for (double w : {1.5, 1.6, 1.7, 1.8, 1.9}) {
    const RadialProfile p = shoot_profile(w);
    char name[48];
    std::snprintf(name, sizeof name, "profile2d_%g.txt", w);
    std::string path;
    if (!out_dir.empty()) {
      path = (fs::path(out_dir) / name).string();
      std::ofstream out(path);
      if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
      p.write(out);
    }
    rows.push_back({{"omega", w}, {"f0", p.center_value()},
                    {"match_radius", p.match_radius()}, {"file", path}});
    if (progress) progress("omega=" + std::to_string(w) + " f(0)=" + std::to_string(p.center_value()));
  }
  summary["profiles"] = rows;
  const std::string text = summary.dump(2);
  if (!out_dir.empty()) {
    std::ofstream(fs::path(out_dir) / "summary.json") << text << '\n';
  }
  return text;
}

}  // namespace

std::vector<ReproduceTarget> reproduce_targets() {
  std::vector<ReproduceTarget> out;
  for (const auto& t : kTargets) out.push_back({t.name, t.description});
  return out;
}

ScenarioConfig reproduce_config(std::string_view name) {
  const Target& t = find_target(name);
  if (!t.make) {
    throw Error(ErrorKind::Config, std::string(name) + " is a profile export, not a scenario");
  }
  return t.make();
}

std::string run_reproduce(std::string_view name, const std::string& out_dir,
                          const std::function<void(ScenarioConfig&)>& adjust,
                          const ProgressFn& progress) {
  const Target& t = find_target(name);
  if (!t.make) return export_profiles(out_dir, progress);
  ScenarioConfig c = t.make();
  c.out_dir = out_dir;
  if (adjust) adjust(c);
  return run_scenario(c, progress).summary_json;
}

}  // namespace qball
