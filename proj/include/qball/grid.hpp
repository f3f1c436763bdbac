#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include "qball/model.hpp"

namespace qball {

/// Uniform grid centred on the origin. Node i sits at (i - (n - 1) / 2) dx, so
/// both axes are mirror symmetric about zero.
struct Grid {
  int dim = 1;
  std::size_t nx = 12001;
  std::size_t ny = 1;
  double dx = 0.01;
  double dy = 0.01;
  double dt = 0.0025;

  /// 12001 points on [-60, 60], dx = 0.01, dt = 0.0025.
  static Grid default_1d();
  /// 300 x 300 cell centres covering [-15, 15)^2, dx = dy = 0.1, dt = 0.02.
  static Grid default_2d();

  std::size_t size() const noexcept { return nx * ny; }
  std::size_t index(std::size_t i, std::size_t j) const noexcept {
    return j * nx + i;
  }

  double x(std::size_t i) const noexcept {
    return (static_cast<double>(i) - 0.5 * static_cast<double>(nx - 1)) * dx;
  }
  double y(std::size_t j) const noexcept {
    if (dim == 1) return 0.0;
    return (static_cast<double>(j) - 0.5 * static_cast<double>(ny - 1)) * dy;
  }
  Point2 point(std::size_t idx) const noexcept {
    return {x(idx % nx), y(idx / nx)};
  }

  double x_max() const noexcept { return x(nx - 1); }
  double y_max() const noexcept { return y(ny - 1); }

  /// dx in 1D, dx * dy in 2D.
  double cell_volume() const noexcept { return dim == 1 ? dx : dx * dy; }

  /// Throws Error(Config) on inconsistent shapes, non-positive spacings or
  /// dt >= min(dx, dy).
  void validate() const;

  bool operator==(const Grid&) const = default;
};

/// Complex field and its time derivative, stored as four real arrays.
struct FieldState {
  Grid grid;
  double t = 0.0;
  std::vector<double> re, im, vre, vim;

  FieldState() = default;
  explicit FieldState(const Grid& g);

  std::size_t size() const noexcept { return re.size(); }
  std::complex<double> phi(std::size_t k) const { return {re[k], im[k]}; }
  std::complex<double> phi_dot(std::size_t k) const { return {vre[k], vim[k]}; }
  void set(std::size_t k, std::complex<double> phi, std::complex<double> dot) {
    re[k] = phi.real();
    im[k] = phi.imag();
    vre[k] = dot.real();
    vim[k] = dot.imag();
  }

  bool all_finite() const noexcept;
};

/// Static lambda sampled at grid nodes.
class LambdaField {
 public:
  LambdaField() = default;
  LambdaField(const Grid& grid, const ObstructionSpec& obstruction);

  /// Uniform lambda = 1.
  static LambdaField uniform(const Grid& grid, double value = 1.0);

  const std::vector<double>& values() const noexcept { return lambda_; }
  double operator[](std::size_t k) const noexcept { return lambda_[k]; }
  std::size_t size() const noexcept { return lambda_.size(); }

 private:
  std::vector<double> lambda_;
};

}  // namespace qball
