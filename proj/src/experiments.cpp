#include "qball/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <tuple>

#include <json.hpp>

#include "qball/error.hpp"

#ifndef QBALL_VERSION
#define QBALL_VERSION "dev"
#endif

namespace qball {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Shot profiles are reused across the runs of a sweep.
const RadialProfile& cached_profile(double omega, const ShootOptions& opt) {
  static std::mutex mutex;
  static std::map<std::tuple<double, double, double, double>, RadialProfile> cache;
  const std::lock_guard lock(mutex);
  const auto key = std::make_tuple(std::abs(omega), opt.r_max, opt.dr, opt.tol);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, shoot_profile(std::abs(omega), 1.0, opt)).first;
  }
  return it->second;
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

json point_json(Point2 p, int dim) {
  if (dim == 1) return p.x;
  return json::array({p.x, p.y});
}

}  // namespace

// ---------------------------------------------------------------------------

RunRecord simulate(const RunSpec& spec) {
  const auto t0 = Clock::now();
  RunRecord rec;
  rec.spec = spec;
  spec.qball.validate();
  spec.grid.validate();

  FieldState state;
  if (spec.grid.dim == 1) {
    state = field_from_exact(spec.qball, spec.grid);
  } else {
    // A profile that cannot be shot is a failed run, not a fatal error.
    try {
      const RadialProfile& profile = cached_profile(spec.qball.omega, spec.shoot);
      state = field_from_radial(profile, spec.qball, spec.grid).state;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Numerical && e.kind() != ErrorKind::Bracket) throw;
      rec.failed = true;
      rec.error = e.what();
      rec.wall_seconds = seconds_since(t0);
      return rec;
    }
  }
  const LambdaField lambda(spec.grid, spec.obstruction);
  Evolver evolver(spec.grid, lambda, spec.absorber, spec.threads);
  TrajectoryRecorder recorder(spec.qball, spec.obstruction, lambda, spec.tracker);

  const Observer observe = [&](const FieldState& s) {
    recorder.record(s);
    const Trajectory& t = recorder.trajectory();
    if (spec.early_stop && outcome_decided(t, spec.classify)) return false;
    return !(spec.stop_when_captured && captured(t));
  };
  RunOptions opts;
  opts.t_end = spec.t_end;
  opts.observe_every = spec.observe_every;
  opts.blowup_dump = spec.blowup_dump;
  try {
    const RunResult r = run(state, evolver, opts, std::span(&observe, 1));
    rec.t_final = r.t;
  } catch (const BlowupError& e) {
    rec.failed = true;
    rec.error = e.what();
    rec.t_final = e.time();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Numerical) throw;
    rec.failed = true;
    rec.error = e.what();
    rec.t_final = state.t;
  }
  rec.trajectory = recorder.take();
  rec.outcome = classify(rec.trajectory, spec.classify);
  if (spec.grid.dim == 2) {
    rec.deflection = deflection_angle(rec.trajectory, spec.deflection);
  }
  rec.wall_seconds = seconds_since(t0);
  return rec;
}

ObstructionSpec make_obstruction(const ScenarioConfig& c, double lambda0,
                                 double impact) {
  if (lambda0 == 0.0) return ObstructionSpec::none();
  if (c.dim == 1) return ObstructionSpec::interval(lambda0, c.region_lo, c.region_hi);
  if (c.kind == ScenarioKind::TwoHoleSymmetric) {
    return ObstructionSpec::disks(
        lambda0, {Disk2D{{c.center_x, impact}, c.radius},
                  Disk2D{{c.center_x, -impact}, c.radius}});
  }
  return ObstructionSpec::disk(lambda0, {c.center_x, impact}, c.radius);
}

RunSpec make_run(const ScenarioConfig& c, double omega, double u,
                 double lambda0, double impact) {
  RunSpec r;
  r.qball = QBallSpec{omega, u, c.x0, c.y0};
  r.obstruction = make_obstruction(c, lambda0, impact);
  r.grid = c.grid;
  r.absorber = c.absorber;
  r.t_end = c.t_end;
  r.observe_every = c.observe_every;
  r.threads = c.threads;
  r.early_stop = c.early_stop;
  r.tracker = c.tracker;
  r.classify = c.classify;
  r.deflection = c.deflection;
  r.shoot = c.shoot;
  return r;
}

Grid regrid(const Grid& g, double spacing) {
  if (!(spacing > 0.0)) throw Error(ErrorKind::Config, "grid spacing must be positive");
  Grid out = g;
  const double ratio = g.dt / g.dx;
  if (g.dim == 1) {
    const double length = static_cast<double>(g.nx - 1) * g.dx;
    out.nx = static_cast<std::size_t>(std::llround(length / spacing)) + 1;
  } else {
    out.nx = static_cast<std::size_t>(std::llround(static_cast<double>(g.nx) * g.dx / spacing));
    out.ny = static_cast<std::size_t>(std::llround(static_cast<double>(g.ny) * g.dy / spacing));
    out.dy = spacing;
  }
  out.dx = spacing;
  if (g.dim == 1) out.dy = spacing;
  out.dt = ratio * spacing;
  return out;
}

// ---------------------------------------------------------------------------

ProbeSide probe_side(const ObstructionSpec& obs, const RunRecord& run) {
  const Outcome o = run.outcome.outcome;
  if (o == Outcome::Transmitted) return ProbeSide::High;
  if (o == Outcome::Reflected) return ProbeSide::Low;
  if (run.trajectory.empty()) return ProbeSide::Low;
  const auto& last = run.trajectory.back();
  if (obs.is_hole()) {
    const auto extent = obs.x_extent();
    const bool escaping = extent && last.position.x > extent->second &&
                          last.velocity.x > 0.0;
    return escaping ? ProbeSide::High : ProbeSide::Low;
  }
  if (obs.is_barrier()) {
    return last.velocity.x < 0.0 ? ProbeSide::Low : ProbeSide::High;
  }
  return ProbeSide::Low;
}

CriticalVelocityResult find_critical_velocity(
    const ScenarioConfig& c, double omega, double lambda0,
    const std::function<void(const RunRecord&)>& on_probe) {
  CriticalVelocityResult res;
  res.omega = omega;
  res.lambda0 = lambda0;
  const ObstructionSpec obs = make_obstruction(c, lambda0);
  double lo = c.u_lo, hi = c.u_hi;

  if (obs.is_barrier()) {
    res.predicted = critical_velocity_barrier(lambda0);
    res.m_rest = mass_closed_form(std::abs(omega));
    res.e_top = *res.m_rest * std::sqrt(1.0 + lambda0);
    res.predicted_energy = critical_velocity_energy(*res.m_rest, *res.e_top);
  }
  if (obs.is_hole()) {
    const auto limit = stability_velocity_limit(omega, 1.0 + lambda0);
    if (!limit || *limit <= lo) {
      res.note = "no critical velocity: E/Q exceeds the stability line in the "
                 "hole for every probe speed";
      res.u_lo = lo;
      res.u_hi = hi;
      return res;
    }
    if (*limit < hi) {
      hi = *limit;
      res.note = "upper bracket capped at the stability speed limit " +
                 std::to_string(*limit);
    }
  }

  auto probe = [&](double u) {
    RunSpec spec = make_run(c, omega, u, lambda0);
    // A Q-ball that turned back after entering a hole can only lose energy
    // from then on, so it will not escape.
    spec.stop_when_captured = obs.is_hole() && c.early_stop;
    RunRecord r = simulate(spec);
    const ProbeSide side = probe_side(obs, r);
    if (on_probe) on_probe(r);
    res.probes.push_back(std::move(r));
    return side;
  };

  const ProbeSide s_lo = probe(lo);
  const ProbeSide s_hi = probe(hi);
  if (s_lo == s_hi || s_lo == ProbeSide::High) {
    const auto& a = res.probes[res.probes.size() - 2].outcome;
    const auto& b = res.probes.back().outcome;
    throw Error(ErrorKind::Bracket,
                "inconsistent bracket: u=" + std::to_string(lo) + " -> " +
                    to_string(a.outcome) + ", u=" + std::to_string(hi) + " -> " +
                    to_string(b.outcome));
  }
  while (hi - lo >= c.tolerance) {
    const double mid = 0.5 * (lo + hi);
    if (probe(mid) == ProbeSide::High) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  res.u_lo = lo;
  res.u_hi = hi;
  res.u_cr = 0.5 * (lo + hi);
  res.bracket_width = hi - lo;
  return res;
}

// ---------------------------------------------------------------------------

double energy_per_charge(double omega, double u) {
  const double w = std::abs(omega);
  return energy_of_moving(w, u) / charge_closed_form(w, u);
}

std::optional<double> stability_velocity_limit(double omega, double lambda) {
  const double m = stability_mass(lambda);
  const double r = energy_per_charge(omega, 0.0) / m;
  if (r >= 1.0) return std::nullopt;
  return std::sqrt(1.0 - r * r);
}

std::optional<double> stability_intersection(double u, double lambda) {
  const double m = stability_mass(lambda);
  const OmegaRange range = omega_bounds(1.0);
  const double eps = 1e-6;
  auto excess = [&](double w) { return energy_per_charge(w, u) - m; };
  const int n = 2000;
  double prev_w = range.lower + eps;
  if (excess(prev_w) >= 0.0) return prev_w;
  for (int i = 1; i <= n; ++i) {
    const double w = range.lower + eps +
                     (range.upper - range.lower - 2.0 * eps) * i / n;
    if (excess(w) >= 0.0) {
      double a = prev_w, b = w;
      for (int k = 0; k < 100 && b - a > 1e-13; ++k) {
        const double mid = 0.5 * (a + b);
        (excess(mid) >= 0.0 ? b : a) = mid;
      }
      return 0.5 * (a + b);
    }
    prev_w = w;
  }
  return std::nullopt;
}

StabilityReport stability_report(const std::vector<double>& omegas,
                                 const std::vector<double>& velocities,
                                 const std::vector<double>& lambdas) {
  StabilityReport rep;
  for (double u : velocities) {
    for (double w : omegas) {
      StabilityRow row;
      row.omega = w;
      row.u = u;
      row.energy = energy_of_moving(std::abs(w), u);
      row.charge = charge_closed_form(std::abs(w), u);
      row.e_over_q = row.energy / row.charge;
      row.e_over_q_prefactor = energy_prefactor_formula(std::abs(w), u) / row.charge;
      rep.rows.push_back(row);
    }
    for (double l : lambdas) {
      rep.lines.push_back({l, stability_mass(l), u, stability_intersection(u, l)});
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------

bool strictly_decreasing(const std::vector<DeflectionEntry>& table) {
  std::map<std::tuple<double, double, double>, std::vector<const DeflectionEntry*>> groups;
  for (const auto& e : table) groups[{e.omega, e.u, e.lambda0}].push_back(&e);
  for (auto& [key, entries] : groups) {
    std::sort(entries.begin(), entries.end(),
              [](auto* a, auto* b) { return a->impact < b->impact; });
    for (std::size_t i = 1; i < entries.size(); ++i) {
      if (!entries[i]->theta || !entries[i - 1]->theta) return false;
      if (!(std::abs(*entries[i]->theta) < std::abs(*entries[i - 1]->theta))) {
        return false;
      }
    }
  }
  return true;
}

std::string force_sign(const Trajectory& traj, double threshold) {
  if (traj.samples.size() < 2) return "neutral";
  const auto extent = traj.obstruction.x_extent();
  if (!extent) return "neutral";
  const double centre = 0.5 * (extent->first + extent->second);
  const double x0 = traj.samples.front().position.x;
  const double towards = centre > x0 ? 1.0 : -1.0;
  const double moved = (traj.back().position.x - x0) * towards;
  if (moved > threshold) return "attractive";
  if (moved < -threshold) return "repulsive";
  return "neutral";
}

namespace {

json run_json(const RunRecord& r, int dim) {
  json j;
  j["omega"] = r.spec.qball.omega;
  j["u"] = r.spec.qball.u;
  j["lambda0"] = r.spec.obstruction.strength();
  j["outcome"] = to_string(r.outcome.outcome);
  j["fission"] = r.outcome.fission;
  j["final_position"] = point_json(r.outcome.final_position, dim);
  j["final_speed"] = r.outcome.final_speed;
  j["parent_fraction"] = r.outcome.parent_fraction;
  j["region_fraction"] = r.outcome.region_fraction;
  j["late_blobs"] = late_blob_count(r.trajectory);
  j["force"] = force_sign(r.trajectory);
  if (dim == 2) j["deflection_deg"] = optional_number(r.deflection);
  j["t_final"] = r.t_final;
  j["wall_seconds"] = r.wall_seconds;
  j["csv"] = r.csv_path;
  j["failed"] = r.failed;
  if (r.failed) j["error"] = r.error;
  return j;
}

json search_json(const CriticalVelocityResult& s, int dim) {
  json j;
  j["omega"] = s.omega;
  j["lambda0"] = s.lambda0;
  j["u_cr"] = optional_number(s.u_cr);
  j["bracket"] = {s.u_lo, s.u_hi};
  j["bracket_width"] = s.bracket_width;
  j["predicted_u_cr"] = optional_number(s.predicted);
  j["m_rest"] = optional_number(s.m_rest);
  j["e_top"] = optional_number(s.e_top);
  j["predicted_u_cr_energy"] = optional_number(s.predicted_energy);
  if (s.u_cr && s.predicted) j["measured_minus_predicted"] = *s.u_cr - *s.predicted;
  if (!s.note.empty()) j["note"] = s.note;
  json probes = json::array();
  for (const auto& p : s.probes) {
    json pj = run_json(p, dim);
    pj["side"] = probe_side(p.spec.obstruction, p) == ProbeSide::High ? "high" : "low";
    probes.push_back(pj);
  }
  j["probes"] = probes;
  return j;
}

json stability_json(const StabilityReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows) {
    rows.push_back({{"omega", r.omega}, {"u", r.u}, {"E", r.energy}, {"Q", r.charge},
                    {"E_over_Q", r.e_over_q},
                    {"E_over_Q_prefactor", r.e_over_q_prefactor}});
  }
  json lines = json::array();
  for (const auto& l : rep.lines) {
    lines.push_back({{"lambda", l.lambda}, {"m", l.mass}, {"u", l.u},
                     {"intersection_omega", optional_number(l.intersection)}});
  }
  return {{"curves", rows}, {"lines", lines}};
}

std::string run_stem(const ScenarioConfig& c, double impact) {
  std::string stem = c.name;
  if (c.dim == 2) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "_y%g", impact);
    stem += buf;
  }
  return stem;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path.string() + " for writing");
  out << text << '\n';
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path.string());
}

void write_stability_csv(const fs::path& dir, const StabilityReport& rep) {
  std::ofstream out(dir / "stability_curves.csv");
  out.precision(12);
  out << "omega,u,E,Q,E_over_Q,E_over_Q_prefactor\n";
  for (const auto& r : rep.rows) {
    out << r.omega << ',' << r.u << ',' << r.energy << ',' << r.charge << ','
        << r.e_over_q << ',' << r.e_over_q_prefactor << '\n';
  }
  std::ofstream lines(dir / "stability_lines.csv");
  lines.precision(12);
  lines << "lambda,m,u,intersection_omega\n";
  for (const auto& l : rep.lines) {
    lines << l.lambda << ',' << l.mass << ',' << l.u << ',';
    if (l.intersection) lines << *l.intersection;
    lines << '\n';
  }
}

}  // namespace

std::vector<DeflectionEntry> deflection_sweep(const ScenarioConfig& c,
                                              std::vector<RunRecord>* runs,
                                              const ProgressFn& progress) {
  if (c.dim != 2) throw Error(ErrorKind::Config, "deflection sweeps need a 2D grid");
  std::vector<DeflectionEntry> table;
  for (double w : c.omegas) {
    for (double u : c.velocities) {
      for (double l0 : c.lambda0s) {
        for (double y : c.impacts) {
          RunRecord r = simulate(make_run(c, w, u, l0, y));
          table.push_back({y, w, u, l0, r.deflection, r.outcome.outcome});
          if (progress) {
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "omega=%g u=%g lambda0=%g impact=%g theta=%s (%.1fs)", w, u,
                          l0, y,
                          r.deflection ? std::to_string(*r.deflection).c_str() : "n/a",
                          r.wall_seconds);
            progress(buf);
          }
          if (runs) runs->push_back(std::move(r));
        }
      }
    }
  }
  return table;
}

ScenarioReport run_scenario(const ScenarioConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto t0 = Clock::now();
  ScenarioReport rep;
  rep.config = config;
  const ScenarioConfig& c = config;

  fs::path dir;
  if (!c.out_dir.empty()) {
    dir = c.out_dir;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message());
    json manifest;
    manifest["tool"] = "qball";
    manifest["version"] = QBALL_VERSION;
    manifest["config_path"] = c.source;
    manifest["config"] = json::parse(config_to_json(c));
    manifest["determinism"] =
        "no random numbers are used; identical config, build and thread count "
        "give bit-identical outputs";
    manifest["outputs"] = {{"summary", (dir / "summary.json").string()},
                           {"csv_pattern", "<scenario>_<omega>_<u>_<lambda0>.csv"}};
    write_text(dir / "manifest.json", manifest.dump(2));
  }

  auto save_csv = [&](RunRecord& r, double impact) {
    if (dir.empty() || !c.write_csv) return;
    const auto name = trajectory_file_name(run_stem(c, impact), r.spec.qball.omega,
                                           r.spec.qball.u, r.spec.obstruction.strength());
    r.csv_path = (dir / name).string();
    write_trajectory_csv(r.csv_path, r.trajectory);
  };
  auto report_run = [&](const RunRecord& r) {
    if (!progress) return;
    char buf[200];
    std::snprintf(buf, sizeof buf, "omega=%g u=%g lambda0=%g -> %s%s (t=%.1f, %.1fs)",
                  r.spec.qball.omega, r.spec.qball.u, r.spec.obstruction.strength(),
                  to_string(r.outcome.outcome).c_str(),
                  r.failed ? " [failed]" : "", r.t_final, r.wall_seconds);
    progress(buf);
  };

  json summary;
  summary["tool"] = "qball";
  summary["version"] = QBALL_VERSION;
  summary["scenario"] = to_string(c.kind);
  summary["config"] = json::parse(config_to_json(c));

  switch (c.kind) {
    case ScenarioKind::StabilityCurves: {
      rep.stability = stability_report(c.omegas, c.velocities, c.lambdas);
      summary["stability"] = stability_json(*rep.stability);
      if (!dir.empty()) write_stability_csv(dir, *rep.stability);
      break;
    }
    case ScenarioKind::CriticalVelocitySearch: {
      json searches = json::array();
      for (double w : c.omegas) {
        for (double l0 : c.lambda0s) {
          json sj;
          try {
            auto res = find_critical_velocity(c, w, l0, report_run);
            for (auto& p : res.probes) save_csv(p, 0.0);
            sj = search_json(res, c.dim);
            rep.searches.push_back(std::move(res));
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::Bracket) throw;
            sj = {{"omega", w}, {"lambda0", l0}, {"u_cr", nullptr},
                  {"failed", true}, {"error", e.what()}};
          }
          searches.push_back(sj);
        }
      }
      summary["critical_velocity"] = searches;
      break;
    }
    case ScenarioKind::ImpactParameterSweep: {
      rep.deflections = deflection_sweep(c, &rep.runs, progress);
      json table = json::array();
      for (std::size_t i = 0; i < rep.deflections.size(); ++i) {
        const auto& e = rep.deflections[i];
        save_csv(rep.runs[i], e.impact);
        table.push_back({{"impact", e.impact}, {"omega", e.omega}, {"u", e.u},
                         {"lambda0", e.lambda0}, {"theta_deg", optional_number(e.theta)},
                         {"abs_theta_deg", e.theta ? json(std::abs(*e.theta)) : json(nullptr)},
                         {"outcome", to_string(e.outcome)}});
      }
      summary["deflection"] = table;
      summary["abs_theta_strictly_decreasing"] = strictly_decreasing(rep.deflections);
      break;
    }
    default: {
      for (double w : c.omegas) {
        for (double u : c.velocities) {
          for (double l0 : c.lambda0s) {
            for (double y : c.impacts) {
              RunRecord r = simulate(make_run(c, w, u, l0, y));
              report_run(r);
              save_csv(r, y);
              rep.runs.push_back(std::move(r));
              if (c.dim == 1) break;
            }
          }
        }
      }
      break;
    }
  }

  if (!rep.runs.empty()) {
    json runs = json::array();
    for (const auto& r : rep.runs) {
      json rj = run_json(r, c.dim);
      if (c.kind == ScenarioKind::TwoHoleSymmetric) {
        double max_uy = 0.0, max_y = 0.0;
        for (const auto& s : r.trajectory.samples) {
          max_uy = std::max(max_uy, std::abs(s.velocity.y));
          max_y = std::max(max_y, std::abs(s.position.y));
        }
        rj["max_abs_uy"] = max_uy;
        rj["max_abs_y"] = max_y;
      }
      runs.push_back(rj);
    }
    summary["runs"] = runs;
  }
  rep.wall_seconds = seconds_since(t0);
  summary["wall_seconds"] = rep.wall_seconds;
  rep.summary_json = summary.dump(2);
  if (!dir.empty()) write_text(dir / "summary.json", rep.summary_json);
  return rep;
}

}  // namespace qball
