#include "qball/profile2d.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <string>

#include "qball/error.hpp"
#include "qball/model.hpp"

namespace qball {

namespace {

enum class Shot { Undershoot, Overshoot, Decayed };

struct RadialOde {
  double w2;
  double lambda;

  // Returns (f', f''). At r = 0 the friction term f'/r is replaced by its
  // limit f''(0), giving f''(0) = (U'(f) - omega^2 f) / 2.
  std::pair<double, double> operator()(double r, double f, double g) const {
    const double force = potential_deriv(f, lambda) - w2 * f;
    if (r == 0.0) return {g, 0.5 * force};
    return {g, force - g / r};
  }
};

struct Trace {
  std::vector<double> f, fp;
};

struct ShotResult {
  Shot kind;
  std::size_t steps;  // RK4 steps taken before classification
};

// Integrates from r = 0 with classical RK4; stops on classification.
ShotResult integrate(const RadialOde& ode, double f0, double dr,
                     std::size_t max_steps, double tol, Trace* trace) {
  double f = f0, g = 0.0, r = 0.0;
  if (trace) {
    trace->f.assign(1, f);
    trace->fp.assign(1, g);
  }
  for (std::size_t n = 1; n <= max_steps; ++n) {
    const auto [k1f, k1g] = ode(r, f, g);
    const auto [k2f, k2g] = ode(r + 0.5 * dr, f + 0.5 * dr * k1f, g + 0.5 * dr * k1g);
    const auto [k3f, k3g] = ode(r + 0.5 * dr, f + 0.5 * dr * k2f, g + 0.5 * dr * k2g);
    const auto [k4f, k4g] = ode(r + dr, f + dr * k3f, g + dr * k3g);
    f += dr / 6.0 * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
    g += dr / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    r = static_cast<double>(n) * dr;
    if (trace) {
      trace->f.push_back(f);
      trace->fp.push_back(g);
    }
    if (f < 0.0) return {Shot::Overshoot, n};
    if (g > 0.0 && f > tol) return {Shot::Undershoot, n};
    if (!std::isfinite(f) || f > 10.0) return {Shot::Undershoot, n};
  }
  return {Shot::Decayed, max_steps};
}

}  // namespace

RadialProfile::RadialProfile(double omega, double lambda, double dr,
                             std::vector<double> f, std::vector<double> fp,
                             double match_radius)
    : omega_(omega),
      lambda_(lambda),
      dr_(dr),
      kappa_(std::sqrt(4.0 * lambda - omega * omega)),
      match_r_(match_radius),
      f_(std::move(f)),
      fp_(std::move(fp)) {
  const auto m = static_cast<std::size_t>(std::llround(match_r_ / dr_));
  tail_amp_ = f_.at(std::min(m, f_.size() - 1)) /
              std::cyl_bessel_k(0.0, kappa_ * match_r_);
}

double RadialProfile::tail_value(double r) const {
  const double z = kappa_ * r;
  if (z > 700.0) return 0.0;
  return tail_amp_ * std::cyl_bessel_k(0.0, z);
}

double RadialProfile::tail_slope(double r) const {
  const double z = kappa_ * r;
  if (z > 700.0) return 0.0;
  return -kappa_ * tail_amp_ * std::cyl_bessel_k(1.0, z);
}

double RadialProfile::value(double r) const {
  r = std::abs(r);
  const double pos = r / dr_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= f_.size()) return tail_value(r);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * f_[i] + w * f_[i + 1];
}

double RadialProfile::slope(double r) const {
  r = std::abs(r);
  const double pos = r / dr_;
  const auto i = static_cast<std::size_t>(pos);
  if (i + 1 >= fp_.size()) return tail_slope(r);
  const double w = pos - static_cast<double>(i);
  return (1.0 - w) * fp_[i] + w * fp_[i + 1];
}

void RadialProfile::write(std::ostream& out, std::size_t stride) const {
  stride = std::max<std::size_t>(1, stride);
  out.precision(12);
  out << "# r f  (omega=" << omega_ << ", lambda=" << lambda_ << ")\n";
  for (std::size_t i = 0; i < f_.size(); i += stride) {
    out << dr_ * static_cast<double>(i) << ' ' << f_[i] << '\n';
  }
}

RadialProfile shoot_profile(double omega, double lambda,
                            const ShootOptions& opt) {
  require_existence(omega, lambda);
  if (!(opt.dr > 0.0) || !(opt.r_max > opt.dr) || !(opt.tol > 0.0)) {
    throw Error(ErrorKind::Config, "invalid shooting options");
  }
  const double w = std::abs(omega);
  const RadialOde ode{w * w, lambda};
  const auto steps = static_cast<std::size_t>(std::llround(opt.r_max / opt.dr));

  // Starting values are confined below the hilltop of the inverted
  // effective potential; beyond it the solution runs away.
  const double disc = std::sqrt(64.0 * lambda * lambda -
                                24.0 * lambda * (4.0 * lambda - w * w));
  const double f_top = std::sqrt((8.0 * lambda + disc) / (12.0 * lambda));
  const auto classify = [&](double f0) {
    return integrate(ode, f0, opt.dr, steps, opt.tol, nullptr).kind;
  };

  // Scan for the first undershoot -> overshoot transition in f(0).
  double lo = -1.0, hi = -1.0;
  double last_under = -1.0;
  const double scan_end = std::min(opt.scan_max, f_top);
  for (int n = 1;; ++n) {
    const double f0 = n * opt.scan_step;
    if (f0 >= scan_end) break;
    if (classify(f0) == Shot::Undershoot) {
      last_under = f0;
    } else if (last_under > 0.0) {
      lo = last_under;
      hi = f0;
      break;
    }
  }
  // Thin-wall profiles start within one scan step of the hilltop.
  if (lo < 0.0 && last_under > 0.0 && f_top <= opt.scan_max) {
    for (int k = 2; k <= 15 && lo < 0.0; ++k) {
      const double f0 = f_top * (1.0 - std::pow(10.0, -k));
      if (f0 <= last_under) continue;
      if (classify(f0) == Shot::Undershoot) {
        last_under = f0;
      } else {
        lo = last_under;
        hi = f0;
      }
    }
  }
  if (lo < 0.0) {
    throw Error(ErrorKind::Bracket,
                "no undershoot/overshoot transition for f(0) in (0, " +
                    std::to_string(scan_end) + "]");
  }

  int iter = 0;
  while (hi - lo > opt.bracket_width) {
    if (++iter > opt.max_iterations) {
      throw Error(ErrorKind::Numerical,
                  "shooting bisection did not converge; bracket width " +
                      std::to_string(hi - lo));
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (classify(mid) == Shot::Undershoot) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  // The bracket ends agree until round-off growth separates them; the
  // numerical solution is kept up to that point and the K0 tail after it.
  Trace under, over;
  integrate(ode, lo, opt.dr, steps, opt.tol, &under);
  integrate(ode, hi, opt.dr, steps, opt.tol, &over);
  const std::size_t common = std::min(under.f.size(), over.f.size());
  constexpr double kSeparation = 1e-6;
  std::size_t match = common - 1;
  for (std::size_t i = 1; i < common; ++i) {
    const double mid = 0.5 * (under.f[i] + over.f[i]);
    if (std::abs(under.f[i] - over.f[i]) > kSeparation * mid ||
        mid < 1e-2 * opt.tol) {
      match = i - 1;
      break;
    }
  }
  if (match < 2) {
    throw Error(ErrorKind::Numerical, "shooting solution separated at the origin");
  }

  // The K0 tail is only valid in the linear regime.
  const double f_match = 0.5 * (under.f[match] + over.f[match]);
  if (f_match > 0.05 * lo) {
    throw Error(ErrorKind::Numerical,
                "shooting lost precision at r = " +
                    std::to_string(static_cast<double>(match) * opt.dr) +
                    " while f = " + std::to_string(f_match) +
                    " (thin-wall profile)");
  }

  std::vector<double> f(steps + 1), fp(steps + 1);
  for (std::size_t i = 0; i <= match; ++i) {
    f[i] = 0.5 * (under.f[i] + over.f[i]);
    fp[i] = 0.5 * (under.fp[i] + over.fp[i]);
  }
  const double match_r = static_cast<double>(match) * opt.dr;
  const double kappa = std::sqrt(4.0 * lambda - w * w);
  const double amp = f[match] / std::cyl_bessel_k(0.0, kappa * match_r);
  for (std::size_t i = match + 1; i <= steps; ++i) {
    const double z = kappa * static_cast<double>(i) * opt.dr;
    f[i] = z > 700.0 ? 0.0 : amp * std::cyl_bessel_k(0.0, z);
    fp[i] = z > 700.0 ? 0.0 : -kappa * amp * std::cyl_bessel_k(1.0, z);
  }
  if (!(f[steps] < opt.tol)) {
    throw Error(ErrorKind::Numerical,
                "profile has not decayed below tol at r_max; increase r_max");
  }
  return RadialProfile(w, lambda, opt.dr, std::move(f), std::move(fp), match_r);
}

SampledField field_from_radial(const RadialProfile& profile,
                               const QBallSpec& spec, const Grid& grid) {
  if (grid.dim != 2) {
    throw Error(ErrorKind::Config, "field_from_radial needs a 2D grid");
  }
  if (std::abs(std::abs(spec.omega) - profile.omega()) > 1e-12) {
    throw Error(ErrorKind::Config, "profile omega does not match the Q-ball spec");
  }
  if (!(std::abs(spec.u) < 1.0)) {
    throw Error(ErrorKind::Domain, "launch velocity must satisfy |u| < 1");
  }
  const double g = spec.gamma();
  const double w = spec.omega;
  SampledField out{FieldState(grid), 0.0, false};
  for (std::size_t j = 0; j < grid.ny; ++j) {
    for (std::size_t i = 0; i < grid.nx; ++i) {
      const double dx = grid.x(i) - spec.x0;
      const double dy = grid.y(j) - spec.y0;
      const double xp = g * dx;
      const double r = std::hypot(xp, dy);
      const double f = profile.value(r);
      const double fr = r > 0.0 ? profile.slope(r) * xp / r : 0.0;
      const std::complex<double> rot = std::polar(1.0, -w * g * spec.u * dx);
      const std::complex<double> dot(-g * spec.u * fr, w * g * f);
      const std::size_t k = grid.index(i, j);
      out.state.set(k, f * rot, dot * rot);
      if (i == 0 || j == 0 || i == grid.nx - 1 || j == grid.ny - 1) {
        out.edge_amplitude = std::max(out.edge_amplitude, std::abs(f));
      }
    }
  }
  out.support_clipped = out.edge_amplitude > 1e-4;
  return out;
}

}  // namespace qball
