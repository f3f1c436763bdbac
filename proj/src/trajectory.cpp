#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>

#include "qball/diagnostics.hpp"
#include "qball/error.hpp"
#include "quadrature.hpp"

namespace qball {

namespace {

struct LineFit {
  double slope_x = 0.0;
  double slope_y = 0.0;
};

// Least-squares slopes of x(t) and y(t); times are shifted to the first
// sample to keep the normal equations well conditioned.
LineFit fit_lines(const std::vector<const TrajectorySample*>& pts) {
  const std::size_t n = pts.size();
  if (n < 2) return {};
  const double t0 = pts.front()->t;
  double st = 0, sx = 0, sy = 0, stt = 0, stx = 0, sty = 0;
  for (const auto* p : pts) {
    const double t = p->t - t0;
    st += t;
    sx += p->position.x;
    sy += p->position.y;
    stt += t * t;
    stx += t * p->position.x;
    sty += t * p->position.y;
  }
  const double nn = static_cast<double>(n);
  const double den = nn * stt - st * st;
  if (den <= 0.0) return {};
  return {(nn * stx - st * sx) / den, (nn * sty - st * sy) / den};
}

std::vector<Point2> obstruction_centres(const ObstructionSpec& obs,
                                        double& radius) {
  std::vector<Point2> centres;
  radius = 0.0;
  if (const auto* d = std::get_if<Disk2D>(&obs.region())) {
    centres.push_back(d->center);
    radius = d->radius;
  } else if (const auto* u = std::get_if<DiskUnion>(&obs.region())) {
    for (const auto& disk : u->disks) {
      centres.push_back(disk.center);
      radius = std::max(radius, disk.radius);
    }
  } else if (const auto* iv = std::get_if<Interval1D>(&obs.region())) {
    centres.push_back({0.5 * (iv->lo + iv->hi), 0.0});
    radius = 0.5 * (iv->hi - iv->lo);
  }
  return centres;
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

TrajectoryRecorder::TrajectoryRecorder(const QBallSpec& qball,
                                       const ObstructionSpec& obstruction,
                                       const LambdaField& lambda,
                                       TrackerOptions options)
    : lambda_(&lambda), opt_(options) {
  traj_.qball = qball;
  traj_.obstruction = obstruction;
  if (opt_.velocity_window < 2) opt_.velocity_window = 2;
}

void TrajectoryRecorder::record(const FieldState& state) {
  if (traj_.samples.empty()) {
    traj_.grid = state.grid;
    region_ = region_mask(state.grid, traj_.obstruction);
  }
  const Grid& g = state.grid;
  const double dv = g.cell_volume();
  const auto j0 = charge_density(state);

  TrajectorySample s;
  s.t = state.t;
  detail::CompensatedSum q, qr;
  for (std::size_t k = 0; k < j0.size(); ++k) {
    q.add(j0[k]);
    if (region_[k]) qr.add(j0[k]);
  }
  s.charge = q.value() * dv;
  s.region_charge = qr.value() * dv;
  if (opt_.energy) s.energy = total_energy(state, *lambda_);
  s.momentum = total_momentum(state);
  s.blobs = find_blobs(g, j0, {}, opt_.blob_threshold, opt_.blob_min_cells).size();

  const auto parts = find_blobs(g, j0, {}, opt_.centroid_threshold,
                                opt_.blob_min_cells);
  if (parts.empty()) {
    s.present = false;
    if (!traj_.samples.empty()) s.position = traj_.samples.back().position;
  } else {
    s.position = parts.front().centroid;
    s.parent_charge = parts.front().charge;
  }
  traj_.samples.push_back(s);
  const std::size_t last = traj_.samples.size() - 1;
  traj_.samples.back().velocity =
      fit_velocity(traj_.samples, last, opt_.velocity_window);
}

Point2 fit_velocity(const std::vector<TrajectorySample>& samples,
                    std::size_t last, std::size_t window) {
  std::vector<const TrajectorySample*> pts;
  for (std::size_t k = last + 1; k-- > 0 && pts.size() < window;) {
    if (samples[k].present) pts.push_back(&samples[k]);
  }
  std::reverse(pts.begin(), pts.end());
  const LineFit f = fit_lines(pts);
  return {f.slope_x, f.slope_y};
}

std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Transmitted: return "transmitted";
    case Outcome::Reflected: return "reflected";
    case Outcome::Trapped: return "trapped";
    case Outcome::Undecided: return "undecided";
  }
  return "undecided";
}

std::size_t late_blob_count(const Trajectory& traj, std::size_t window) {
  if (traj.samples.empty()) return 0;
  const std::size_t n = std::min(window, traj.samples.size());
  std::vector<std::size_t> counts;
  for (std::size_t k = traj.samples.size() - n; k < traj.samples.size(); ++k) {
    counts.push_back(traj.samples[k].blobs);
  }
  std::nth_element(counts.begin(), counts.begin() + counts.size() / 2,
                   counts.end());
  return counts[counts.size() / 2];
}

namespace {

Outcome position_outcome(const Trajectory& traj, const ClassifyOptions& opt) {
  const auto extent = traj.obstruction.x_extent();
  if (!extent || traj.samples.empty()) return Outcome::Undecided;
  const auto& s = traj.samples.back();
  const auto [lo, hi] = *extent;
  if (!s.present) return Outcome::Undecided;
  if (s.position.x > hi + opt.margin && s.velocity.x > 0.0) {
    return Outcome::Transmitted;
  }
  if (s.position.x < lo - opt.margin && s.velocity.x < 0.0) {
    return Outcome::Reflected;
  }
  if (s.position.x >= lo && s.position.x <= hi) return Outcome::Trapped;
  return Outcome::Undecided;
}

}  // namespace

bool captured(const Trajectory& traj, double min_speed) {
  const auto extent = traj.obstruction.x_extent();
  if (!extent || traj.samples.empty()) return false;
  const auto& last = traj.samples.back();
  if (!last.present || !(last.velocity.x < -min_speed)) return false;
  for (const auto& s : traj.samples) {
    if (s.present && s.position.x >= extent->first) return true;
  }
  return false;
}

bool outcome_decided(const Trajectory& traj, const ClassifyOptions& opt) {
  const Outcome o = position_outcome(traj, opt);
  return o == Outcome::Transmitted || o == Outcome::Reflected;
}

ScatterOutcome classify(const Trajectory& traj, const ClassifyOptions& opt) {
  ScatterOutcome out;
  if (traj.samples.empty()) return out;
  out.outcome = position_outcome(traj, opt);
  const auto& last = traj.samples.back();
  out.final_position = last.position;
  out.final_speed = std::hypot(last.velocity.x, last.velocity.y);
  const double q0 = std::abs(traj.samples.front().charge);
  if (q0 > 0.0) {
    out.parent_fraction = last.parent_charge / q0;
    out.region_fraction = std::abs(last.region_charge) / q0;
  }

  // Longest stretch of consecutive multi-blob samples.
  std::size_t run = 0, best = 0, best_end = 0;
  for (std::size_t k = 0; k < traj.samples.size(); ++k) {
    run = traj.samples[k].blobs > 1 ? run + 1 : 0;
    if (run > best) {
      best = run;
      best_end = k;
    }
  }
  if (best >= std::max<std::size_t>(opt.persistence, 1)) {
    const std::size_t late = late_blob_count(traj);
    if (late > 1) {
      out.fission = late;
    } else {
      Trajectory stretch;
      stretch.samples.assign(traj.samples.begin() + (best_end + 1 - best),
                             traj.samples.begin() + best_end + 1);
      out.fission = late_blob_count(stretch, best);
    }
  }
  return out;
}

std::optional<double> deflection_angle(const Trajectory& traj,
                                       const DeflectionOptions& opt) {
  const auto& ss = traj.samples;
  if (ss.empty()) return std::nullopt;
  double radius = 0.0;
  const auto centres = obstruction_centres(traj.obstruction, radius);
  const double free_r = opt.free_radius.value_or(radius + 5.0);
  auto distance = [&](const TrajectorySample& s) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& c : centres) {
      d = std::min(d, std::hypot(s.position.x - c.x, s.position.y - c.y));
    }
    return d;
  };

  // First approach only: the minimum is locked in once the Q-ball has
  // receded by one unit, so a later return cannot claim it.
  std::size_t closest = 0;
  if (!centres.empty()) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < ss.size(); ++k) {
      if (!ss[k].present) continue;
      const double d = distance(ss[k]);
      if (d < best) {
        best = d;
        closest = k;
      } else if (d > best + 1.0) {
        break;
      }
    }
  }
  const double xlim = traj.grid.x_max() - opt.edge_margin;
  const double ylim = traj.grid.dim == 2 ? traj.grid.y_max() - opt.edge_margin
                                         : std::numeric_limits<double>::infinity();
  // The outgoing leg ends at the edge band or as soon as the Q-ball stops
  // receding, so a rebound off the sponge never enters the fit.
  std::vector<const TrajectorySample*> pts;
  double last_d = -1.0;
  for (std::size_t k = closest; k < ss.size(); ++k) {
    const auto& s = ss[k];
    if (!s.present) continue;
    if (std::abs(s.position.x) > xlim || std::abs(s.position.y) > ylim) break;
    if (!centres.empty()) {
      const double d = distance(s);
      if (d < last_d) break;
      last_d = d;
      if (d <= free_r) continue;
    }
    pts.push_back(&s);
  }
  if (pts.size() < std::max<std::size_t>(opt.min_samples, 2)) return std::nullopt;
  const LineFit f = fit_lines(pts);
  if (f.slope_x == 0.0 && f.slope_y == 0.0) return std::nullopt;
  double theta = std::atan2(f.slope_y, f.slope_x) * 180.0 / std::numbers::pi;
  if (std::abs(theta) >= 179.5) theta = 180.0;
  return theta;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const bool two = traj.grid.dim == 2;
  out << (two ? "t,x,y,ux,uy,Q,E,Px,Py,blobs\n" : "t,x,ux,Q,E,Px,blobs\n");
  char buf[320];
  for (const auto& s : traj.samples) {
    if (two) {
      std::snprintf(buf, sizeof buf,
                    "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu\n",
                    s.t, s.position.x, s.position.y, s.velocity.x, s.velocity.y,
                    s.charge, s.energy, s.momentum.x, s.momentum.y, s.blobs);
    } else {
      std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%zu\n",
                    s.t, s.position.x, s.velocity.x, s.charge, s.energy,
                    s.momentum.x, s.blobs);
    }
    out << buf;
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_trajectory_csv(out, traj);
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

std::string trajectory_file_name(const std::string& scenario, double omega,
                                 double u, double lambda0) {
  return scenario + "_" + format_number(omega) + "_" + format_number(u) + "_" +
         format_number(lambda0) + ".csv";
}

}  // namespace qball
