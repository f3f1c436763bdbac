#pragma once

// Sextic Q-ball potential, spatial obstructions and the analytic stability
// quantities derived from them.
//
// The potential is U(f) = 2 f^2 - 2 f^4 + f^6 in dimensionless field units.
// An obstruction rescales it locally, U -> lambda U with lambda = 1 + lambda0
// inside the obstruction region and exactly 1 elsewhere. lambda0 > 0 makes a
// barrier and -1 < lambda0 < 0 a hole.

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace qball {

struct PotentialCoefficients {
  static constexpr double quadratic = 2.0;
  static constexpr double quartic = -2.0;
  static constexpr double sextic = 1.0;
};

/// lambda * (2 f^2 - 2 f^4 + f^6)
double potential_value(double f, double lambda) noexcept;

/// d/df of potential_value: lambda * (4 f - 8 f^3 + 6 f^5)
double potential_deriv(double f, double lambda) noexcept;

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

struct NoRegion {};

struct Interval1D {
  double lo = -10.0;
  double hi = 10.0;
};

struct Disk2D {
  Point2 center;
  double radius = 5.0;
};

struct DiskUnion {
  std::vector<Disk2D> disks;
};

using Region = std::variant<NoRegion, Interval1D, Disk2D, DiskUnion>;

class ObstructionSpec {
 public:
  ObstructionSpec() = default;

  /// Throws Error(Config) unless lambda0 > -1 and the region is well formed.
  ObstructionSpec(double lambda0, Region region);

  static ObstructionSpec none() { return {}; }
  static ObstructionSpec interval(double lambda0, double lo = -10.0,
                                  double hi = 10.0);
  static ObstructionSpec disk(double lambda0, Point2 center,
                              double radius = 5.0);
  static ObstructionSpec disks(double lambda0, std::vector<Disk2D> disks);

  double strength() const noexcept { return lambda0_; }
  const Region& region() const noexcept { return region_; }

  bool is_none() const noexcept;
  bool is_barrier() const noexcept { return !is_none() && lambda0_ > 0.0; }
  bool is_hole() const noexcept { return !is_none() && lambda0_ < 0.0; }

  /// Boundary inclusive.
  bool contains(Point2 p) const noexcept;

  /// Local potential scale: 1 + lambda0 inside the region, 1 outside.
  double lambda_at(Point2 p) const noexcept;

  /// Smallest and largest x covered by the region; nullopt for NoRegion.
  std::optional<std::pair<double, double>> x_extent() const;

 private:
  double lambda0_ = 0.0;
  Region region_ = NoRegion{};
};

inline double lambda_at(Point2 p, const ObstructionSpec& obs) noexcept {
  return obs.lambda_at(p);
}

/// Scalar mass 2 sqrt(lambda). A Q-ball is stable against decay into free
/// quanta while E/Q stays below it.
double stability_mass(double lambda);

struct OmegaRange {
  double lower = 0.0;
  double upper = 0.0;

  /// Open interval test on |omega|; negative omega is an anti-Q-ball.
  bool contains(double omega) const noexcept;
};

/// (sqrt(2 lambda), 2 sqrt(lambda)).
OmegaRange omega_bounds(double lambda);

/// U_eff''(0) = omega^2 - 4 lambda; negative exactly when omega < omega_+.
double effective_curvature_at_origin(double omega, double lambda) noexcept;

}  // namespace qball
