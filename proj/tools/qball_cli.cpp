// Command-line front end over the C API.
//
// Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qball/qball.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;

int exit_code(qball_status s) {
  switch (s) {
    case QBALL_OK: return kExitOk;
    case QBALL_ERR_NUMERICAL:
    case QBALL_ERR_BLOWUP:
    case QBALL_ERR_BRACKET:
    case QBALL_ERR_INTERNAL: return kExitNumerical;
    default: return kExitConfig;
  }
}

// Prints the failure and returns the exit code for it.
int report(qball_status s, const char* what) {
  if (s == QBALL_OK) return kExitOk;
  std::fprintf(stderr, "qball: %s: %s: %s\n", what, qball_status_name(s), qball_last_error());
  return exit_code(s);
}

// Owns a string returned by the library.
struct LibString {
  char* p = nullptr;
  ~LibString() { qball_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Overrides {
  double dx = 0, dt = 0, t_end = 0;
  unsigned threads = 0;
  qball_overrides c() const { return {dx, dt, t_end, threads}; }
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--threads", o.threads, "Worker threads per evolution")->check(CLI::PositiveNumber);
  cmd->add_option("--dx", o.dx, "Grid spacing (extent is kept, dt keeps its ratio)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--dt", o.dt, "Time step")->check(CLI::PositiveNumber);
  cmd->add_option("--t-end", o.t_end, "Final time of every evolution")->check(CLI::PositiveNumber);
}

std::string default_out(const std::string& name) {
  const char* root = std::getenv("QBALL_OUT_ROOT");
  const std::filesystem::path base = root && *root ? root : "qball_runs";
  return (base / name).string();
}

void print_progress(const char* message, void*) {
  std::fprintf(stderr, "  %s\n", message);
}

std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------

struct ProfileArgs {
  int dim = 1;
  double omega = 1.9;
  double lambda = 1.0;
  std::vector<double> at;
  double from = -20, to = 20, step = 0.1;
  double r_max = 0, dr = 0;
  int precision = 6;
  std::string out;
};

int cmd_profile(const ProfileArgs& a) {
  const int prec = a.precision;
  if (a.dim == 1) {
    auto eval = [&](double x, double& f) {
      return qball_exact_profile(x, a.omega, a.lambda, &f);
    };
    if (!a.at.empty()) {
      for (double x : a.at) {
        double f = 0;
        if (auto s = eval(x, f); s != QBALL_OK) return report(s, "profile");
        std::printf("%.*g\n", prec, f);
      }
      return kExitOk;
    }
    std::FILE* out = a.out.empty() ? stdout : std::fopen(a.out.c_str(), "w");
    if (!out) {
      std::fprintf(stderr, "qball: cannot open %s\n", a.out.c_str());
      return kExitConfig;
    }
    const long n = std::lround((a.to - a.from) / a.step);
    for (long i = 0; i <= n; ++i) {
      const double x = a.from + static_cast<double>(i) * a.step;
      double f = 0;
      if (auto s = eval(x, f); s != QBALL_OK) {
        if (out != stdout) std::fclose(out);
        return report(s, "profile");
      }
      std::fprintf(out, "%.10g %.12g\n", x, f);
    }
    if (out != stdout) std::fclose(out);
    return kExitOk;
  }

  qball_profile* p = nullptr;
  if (auto s = qball_profile_shoot(a.omega, a.lambda, a.r_max, a.dr, &p); s != QBALL_OK) {
    return report(s, "profile");
  }
  int rc = kExitOk;
  if (!a.at.empty()) {
    for (double r : a.at) {
      double f = 0;
      qball_profile_value(p, r, &f);
      std::printf("%.*g\n", prec, f);
    }
  } else if (!a.out.empty()) {
    rc = report(qball_profile_write(p, a.out.c_str(), 10), "profile");
  } else {
    double f0 = 0, rmax = 0, match = 0;
    qball_profile_info(p, &f0, &rmax, &match);
    std::printf("omega=%g f0=%.*g r_max=%g match_radius=%g\n", a.omega, prec, f0, rmax, match);
  }
  qball_profile_free(p);
  return rc;
}

struct ObservablesArgs {
  std::vector<double> omegas{1.9};
  std::vector<double> velocities{0.0};
  std::optional<double> lambda0;
  bool table = false;
  double lambda = 1.0;
};

int cmd_observables(const ObservablesArgs& a) {
  if (a.table) {
    std::printf("omega,u,Q,M,E,E_over_Q,m\n");
    double m = 0;
    if (auto s = qball_stability_mass(a.lambda, &m); s != QBALL_OK) return report(s, "observables");
    for (double u : a.velocities) {
      for (int i = 0; i <= 57; ++i) {
        const double w = 1.42 + 0.01 * i;
        qball_observables o;
        if (auto s = qball_closed_form(w, u, &o); s != QBALL_OK) return report(s, "observables");
        std::printf("%.4g,%g,%.10g,%.10g,%.10g,%.10g,%.10g\n", w, u, o.charge, o.mass,
                    o.energy, o.energy / o.charge, m);
      }
    }
    for (double u : a.velocities) {
      double w = 0;
      int found = 0;
      if (auto s = qball_stability_intersection(u, a.lambda, &w, &found); s != QBALL_OK) {
        return report(s, "observables");
      }
      if (found) {
        std::printf("# u=%g lambda=%g intersection_omega=%.5g\n", u, a.lambda, w);
      } else {
        std::printf("# u=%g lambda=%g intersection_omega=none\n", u, a.lambda);
      }
    }
    return kExitOk;
  }
  for (double w : a.omegas) {
    for (double u : a.velocities) {
      qball_observables o;
      if (auto s = qball_closed_form(w, u, &o); s != QBALL_OK) return report(s, "observables");
      std::printf("omega=%.5g u=%.5g Q=%.5g M=%.5g E=%.5g E/Q=%.5g", w, u, o.charge, o.mass,
                  o.energy, o.energy / o.charge);
      if (a.lambda0) {
        double ucr = 0;
        if (auto s = qball_critical_velocity_barrier(*a.lambda0, &ucr); s != QBALL_OK) {
          return report(s, "observables");
        }
        std::printf(" E_top=%.5g u_cr=%.5g", o.mass * std::sqrt(1.0 + *a.lambda0), ucr);
      }
      std::printf("\n");
    }
  }
  return kExitOk;
}

struct RunArgs {
  std::string config;
  std::string out;
  Overrides ov;
  std::vector<double> omegas, velocities, lambda0s, impacts;
};

int run_config_text(const std::string& text, const RunArgs& a) {
  // The output directory defaults to <root>/<name from the config>.
  std::string out = a.out;
  if (out.empty()) {
    std::string name = "scenario";
    try {
      const auto j = nlohmann::json::parse(text);
      if (j.contains("name") && j["name"].is_string()) name = j["name"].get<std::string>();
    } catch (const nlohmann::json::exception&) {
      // reported by the library below
    }
    out = default_out(name);
  }
  const qball_overrides ov = a.ov.c();
  LibString summary;
  const qball_status s = qball_run_config(text.c_str(), a.config.c_str(), out.c_str(), &ov,
                                          print_progress, nullptr, &summary.p);
  if (s != QBALL_OK) return report(s, "run");
  std::printf("%s\n", (std::filesystem::path(out) / "summary.json").string().c_str());
  return kExitOk;
}

int cmd_run(const RunArgs& a, bool sweep) {
  const auto text = read_file(a.config);
  if (!text) {
    std::fprintf(stderr, "qball: cannot read config %s\n", a.config.c_str());
    return kExitConfig;
  }
  if (!sweep) return run_config_text(*text, a);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(*text);
  } catch (const nlohmann::json::exception& e) {
    std::fprintf(stderr, "qball: invalid JSON in %s: %s\n", a.config.c_str(), e.what());
    return kExitConfig;
  }
  if (!a.omegas.empty()) j["omega"] = a.omegas;
  if (!a.velocities.empty()) j["u"] = a.velocities;
  if (!a.lambda0s.empty()) j["lambda0"] = a.lambda0s;
  if (!a.impacts.empty()) j["impact"] = a.impacts;
  return run_config_text(j.dump(), a);
}

struct ReproduceArgs {
  std::string name;
  std::string out;
  Overrides ov;
  bool list = false;
};

int cmd_reproduce(const ReproduceArgs& a) {
  if (a.list || a.name.empty()) {
    LibString json;
    if (auto s = qball_reproduce_list(&json.p); s != QBALL_OK) return report(s, "reproduce");
    for (const auto& t : nlohmann::json::parse(json.str())) {
      std::printf("%-10s %s\n", t["name"].get<std::string>().c_str(),
                  t["description"].get<std::string>().c_str());
    }
    return a.name.empty() && !a.list ? kExitConfig : kExitOk;
  }
  const std::string out = a.out.empty() ? default_out(a.name) : a.out;
  const qball_overrides ov = a.ov.c();
  LibString summary;
  const qball_status s =
      qball_reproduce(a.name.c_str(), out.c_str(), &ov, print_progress, nullptr, &summary.p);
  if (s != QBALL_OK) return report(s, "reproduce");
  std::printf("%s\n", (std::filesystem::path(out) / "summary.json").string().c_str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Q-ball scattering simulations"};
  app.set_version_flag("--version", std::string(qball_version()));
  app.require_subcommand(1);

  ProfileArgs prof;
  auto* profile = app.add_subcommand("profile", "Exact 1D or shot 2D profile");
  profile->add_option("--d,--dim", prof.dim, "Dimension")->check(CLI::IsMember({1, 2}));
  profile->add_option("--omega", prof.omega, "Internal frequency");
  profile->add_option("--lambda", prof.lambda, "Potential scale");
  profile->add_option("--at", prof.at, "Positions (1D x or 2D r) to evaluate");
  profile->add_option("--from", prof.from, "1D table start");
  profile->add_option("--to", prof.to, "1D table end");
  profile->add_option("--step", prof.step, "1D table step")->check(CLI::PositiveNumber);
  profile->add_option("--r-max", prof.r_max, "2D shooting radius");
  profile->add_option("--dr", prof.dr, "2D radial step");
  profile->add_option("--precision", prof.precision, "Significant digits for --at")
      ->check(CLI::Range(1, 17));
  profile->add_option("--out", prof.out, "Write the two-column table here");

  ObservablesArgs obsv;
  auto* observables = app.add_subcommand("observables", "Closed-form Q, M, E and u_cr");
  observables->add_option("--omega", obsv.omegas, "Frequencies");
  observables->add_option("--u", obsv.velocities, "Speeds");
  observables->add_option("--lambda0", obsv.lambda0, "Barrier height for u_cr");
  observables->add_flag("--table", obsv.table, "CSV of E/Q curves over the existence range");
  observables->add_option("--lambda", obsv.lambda, "Lambda of the stability line (--table)");

  RunArgs runa;
  auto* run = app.add_subcommand("run", "Run a scenario config");
  run->add_option("--config", runa.config, "Scenario JSON")->required();
  run->add_option("--out", runa.out, "Output directory");
  add_override_flags(run, runa.ov);

  RunArgs sweepa;
  auto* sweep = app.add_subcommand("sweep", "Run a scenario config with list overrides");
  sweep->add_option("--config", sweepa.config, "Scenario JSON")->required();
  sweep->add_option("--out", sweepa.out, "Output directory");
  sweep->add_option("--omega", sweepa.omegas, "Frequencies to sweep");
  sweep->add_option("--u", sweepa.velocities, "Speeds to sweep");
  sweep->add_option("--lambda0", sweepa.lambda0s, "Obstruction strengths to sweep");
  sweep->add_option("--impact", sweepa.impacts, "Obstruction offsets to sweep");
  add_override_flags(sweep, sweepa.ov);

  ReproduceArgs repa;
  auto* reproduce = app.add_subcommand("reproduce", "Run a canned table or figure");
  reproduce->add_option("name", repa.name, "Target name (see --list)");
  reproduce->add_option("--out", repa.out, "Output directory");
  reproduce->add_flag("--list", repa.list, "List the targets");
  add_override_flags(reproduce, repa.ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  if (*profile) return cmd_profile(prof);
  if (*observables) return cmd_observables(obsv);
  if (*run) return cmd_run(runa, false);
  if (*sweep) return cmd_run(sweepa, true);
  if (*reproduce) return cmd_reproduce(repa);
  return kExitConfig;
}
