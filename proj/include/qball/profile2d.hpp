#pragma once

// Radial Q-ball profiles in two spatial dimensions, found by shooting on
// f(0) for
//
//   f'' + f'/r + omega^2 f - 2 lambda f (2 - 4 f^2 + 3 f^4) = 0,
//   f'(0) = 0,  f -> 0 as r -> infinity.

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "qball/grid.hpp"
#include "qball/profile1d.hpp"

namespace qball {

struct ShootOptions {
  double r_max = 20.0;
  double dr = 1e-3;
  /// Profile must have decayed below this at r_max.
  double tol = 1e-6;
  double bracket_width = 1e-12;
  double scan_step = 0.01;
  double scan_max = 1.5;
  int max_iterations = 200;
};

/// Sampled profile on [0, r_max] at spacing dr. Beyond the matching radius
/// the numerical solution is replaced by the linearised tail
/// A K0(kappa r), kappa = sqrt(4 lambda - omega^2), which is also used for
/// lookups past r_max.
class RadialProfile {
 public:
  RadialProfile(double omega, double lambda, double dr,
                std::vector<double> f, std::vector<double> fp,
                double match_radius);

  double omega() const noexcept { return omega_; }
  double lambda() const noexcept { return lambda_; }
  double dr() const noexcept { return dr_; }
  double r_max() const noexcept { return dr_ * static_cast<double>(f_.size() - 1); }
  double match_radius() const noexcept { return match_r_; }
  double center_value() const noexcept { return f_.front(); }

  const std::vector<double>& samples() const noexcept { return f_; }
  const std::vector<double>& slopes() const noexcept { return fp_; }

  /// Linear interpolation inside the table, tail formula outside.
  double value(double r) const;
  double slope(double r) const;

  /// Two columns "r f" every `stride` samples.
  void write(std::ostream& out, std::size_t stride = 10) const;

 private:
  double tail_value(double r) const;
  double tail_slope(double r) const;

  double omega_;
  double lambda_;
  double dr_;
  double kappa_;
  double match_r_;
  double tail_amp_;  // f(match_r) / K0(kappa match_r)
  std::vector<double> f_, fp_;
};

/// Throws Error(Existence) outside the frequency range, Error(Bracket) when
/// the scan over f(0) finds no undershoot/overshoot transition and
/// Error(Numerical) when bisection does not converge.
RadialProfile shoot_profile(double omega, double lambda = 1.0,
                            const ShootOptions& options = {});

struct SampledField {
  FieldState state;
  /// max |Phi| over the outermost ring of grid nodes.
  double edge_amplitude = 0.0;
  bool support_clipped = false;
};

/// Samples the x-boosted radial Q-ball on a 2D grid at t = 0. The profile's
/// omega is used; spec.omega may differ only in sign (anti-Q-ball).
SampledField field_from_radial(const RadialProfile& profile,
                               const QBallSpec& spec, const Grid& grid);

}  // namespace qball
