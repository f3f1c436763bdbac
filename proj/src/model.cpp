#include "qball/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qball/error.hpp"

namespace qball {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Existence: return "existence";
    case ErrorKind::Config: return "config";
    case ErrorKind::Numerical: return "numerical";
    case ErrorKind::Blowup: return "blowup";
    case ErrorKind::Bracket: return "bracket";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

double potential_value(double f, double lambda) noexcept {
  const double f2 = f * f;
  return lambda * f2 * (2.0 + f2 * (-2.0 + f2));
}

double potential_deriv(double f, double lambda) noexcept {
  const double f2 = f * f;
  return lambda * f * (4.0 + f2 * (-8.0 + 6.0 * f2));
}

namespace {

void check_disk(const Disk2D& d) {
  if (!(d.radius > 0.0)) {
    throw Error(ErrorKind::Config, "obstruction disk radius must be positive");
  }
}

}  // namespace

ObstructionSpec::ObstructionSpec(double lambda0, Region region)
    : lambda0_(lambda0), region_(std::move(region)) {
  if (!(lambda0 > -1.0) || !std::isfinite(lambda0)) {
    throw Error(ErrorKind::Config,
                "obstruction strength must satisfy lambda0 > -1, got " +
                    std::to_string(lambda0));
  }
  std::visit(
      [](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, Interval1D>) {
          if (!(r.lo < r.hi)) {
            throw Error(ErrorKind::Config, "obstruction interval is empty");
          }
        } else if constexpr (std::is_same_v<T, Disk2D>) {
          check_disk(r);
        } else if constexpr (std::is_same_v<T, DiskUnion>) {
          if (r.disks.empty()) {
            throw Error(ErrorKind::Config, "disk union has no disks");
          }
          for (const auto& d : r.disks) check_disk(d);
        }
      },
      region_);
}

ObstructionSpec ObstructionSpec::interval(double lambda0, double lo,
                                          double hi) {
  return {lambda0, Interval1D{lo, hi}};
}

ObstructionSpec ObstructionSpec::disk(double lambda0, Point2 center,
                                      double radius) {
  return {lambda0, Disk2D{center, radius}};
}

ObstructionSpec ObstructionSpec::disks(double lambda0,
                                       std::vector<Disk2D> disks) {
  return {lambda0, DiskUnion{std::move(disks)}};
}

bool ObstructionSpec::is_none() const noexcept {
  return std::holds_alternative<NoRegion>(region_) || lambda0_ == 0.0;
}

namespace {

bool in_disk(const Disk2D& d, Point2 p) noexcept {
  const double dx = p.x - d.center.x;
  const double dy = p.y - d.center.y;
  return dx * dx + dy * dy <= d.radius * d.radius;
}

}  // namespace

bool ObstructionSpec::contains(Point2 p) const noexcept {
  return std::visit(
      [&](const auto& r) -> bool {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NoRegion>) {
          return false;
        } else if constexpr (std::is_same_v<T, Interval1D>) {
          return p.x >= r.lo && p.x <= r.hi;
        } else if constexpr (std::is_same_v<T, Disk2D>) {
          return in_disk(r, p);
        } else {
          return std::any_of(r.disks.begin(), r.disks.end(),
                             [&](const Disk2D& d) { return in_disk(d, p); });
        }
      },
      region_);
}

double ObstructionSpec::lambda_at(Point2 p) const noexcept {
  return contains(p) ? 1.0 + lambda0_ : 1.0;
}

std::optional<std::pair<double, double>> ObstructionSpec::x_extent() const {
  return std::visit(
      [](const auto& r) -> std::optional<std::pair<double, double>> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, NoRegion>) {
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, Interval1D>) {
          return std::pair{r.lo, r.hi};
        } else if constexpr (std::is_same_v<T, Disk2D>) {
          return std::pair{r.center.x - r.radius, r.center.x + r.radius};
        } else {
          double lo = std::numeric_limits<double>::infinity();
          double hi = -lo;
          for (const auto& d : r.disks) {
            lo = std::min(lo, d.center.x - d.radius);
            hi = std::max(hi, d.center.x + d.radius);
          }
          return std::pair{lo, hi};
        }
      },
      region_);
}

double stability_mass(double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::Domain, "stability_mass requires lambda > 0");
  }
  return 2.0 * std::sqrt(lambda);
}

bool OmegaRange::contains(double omega) const noexcept {
  const double w = std::abs(omega);
  return w > lower && w < upper;
}

OmegaRange omega_bounds(double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::Domain, "omega_bounds requires lambda > 0");
  }
  return {std::sqrt(2.0 * lambda), 2.0 * std::sqrt(lambda)};
}

double effective_curvature_at_origin(double omega, double lambda) noexcept {
  return omega * omega - 4.0 * lambda;
}

}  // namespace qball
