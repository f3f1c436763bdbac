#include "qball/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "qball/error.hpp"
#include "quadrature.hpp"

namespace qball {

namespace {

// Central difference along one axis; the mirror ghost makes it vanish on
// the boundary.
double central_diff(const std::vector<double>& p, const Grid& g,
                    std::size_t i, std::size_t j, int axis) {
  if (axis == 0) {
    if (i == 0 || i == g.nx - 1) return 0.0;
    return (p[g.index(i + 1, j)] - p[g.index(i - 1, j)]) / (2.0 * g.dx);
  }
  if (j == 0 || j == g.ny - 1) return 0.0;
  return (p[g.index(i, j + 1)] - p[g.index(i, j - 1)]) / (2.0 * g.dy);
}

double masked_sum(const std::vector<double>& v, double weight) {
  detail::CompensatedSum s;
  for (double x : v) s.add(x);
  return s.value() * weight;
}

bool selected(const Mask& mask, std::size_t k) {
  return mask.empty() || mask[k] != 0;
}

}  // namespace

std::vector<double> charge_density(const FieldState& s) {
  std::vector<double> j0(s.size());
  for (std::size_t k = 0; k < j0.size(); ++k) {
    j0[k] = s.re[k] * s.vim[k] - s.im[k] * s.vre[k];
  }
  return j0;
}

std::vector<double> energy_density(const FieldState& s,
                                   const LambdaField& lambda) {
  const Grid& g = s.grid;
  if (lambda.size() != s.size()) {
    throw Error(ErrorKind::Config, "lambda field does not match the grid");
  }
  std::vector<double> e(s.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      double grad2 = 0.0;
      for (int axis = 0; axis < g.dim; ++axis) {
        const double dr = central_diff(s.re, g, i, j, axis);
        const double di = central_diff(s.im, g, i, j, axis);
        grad2 += dr * dr + di * di;
      }
      const double kin = s.vre[k] * s.vre[k] + s.vim[k] * s.vim[k];
      const double f = std::hypot(s.re[k], s.im[k]);
      e[k] = 0.5 * kin + 0.5 * grad2 + potential_value(f, lambda[k]);
    }
  }
  return e;
}

std::vector<double> momentum_density(const FieldState& s, int axis) {
  const Grid& g = s.grid;
  if (axis < 0 || axis >= g.dim) {
    throw Error(ErrorKind::Domain, "momentum axis out of range");
  }
  std::vector<double> p(s.size());
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = g.index(i, j);
      const double dr = central_diff(s.re, g, i, j, axis);
      const double di = central_diff(s.im, g, i, j, axis);
      p[k] = -(s.vre[k] * dr + s.vim[k] * di);
    }
  }
  return p;
}

double total_charge(const FieldState& s) {
  return masked_sum(charge_density(s), s.grid.cell_volume());
}

double total_energy(const FieldState& s, const LambdaField& lambda) {
  return masked_sum(energy_density(s, lambda), s.grid.cell_volume());
}

Point2 total_momentum(const FieldState& s) {
  const double dv = s.grid.cell_volume();
  Point2 p{masked_sum(momentum_density(s, 0), dv), 0.0};
  if (s.grid.dim == 2) p.y = masked_sum(momentum_density(s, 1), dv);
  return p;
}

Mask region_mask(const Grid& grid, const ObstructionSpec& obstruction) {
  Mask m(grid.size(), 0);
  if (obstruction.is_none()) return m;
  for (std::size_t k = 0; k < m.size(); ++k) {
    m[k] = obstruction.contains(grid.point(k)) ? 1 : 0;
  }
  return m;
}

Mask complement(const Mask& mask, std::size_t size) {
  if (mask.empty()) return Mask(size, 0);
  Mask out(mask.size());
  std::transform(mask.begin(), mask.end(), out.begin(),
                 [](unsigned char v) -> unsigned char { return v ? 0 : 1; });
  return out;
}

std::vector<Blob> find_blobs(const Grid& grid, const std::vector<double>& j0,
                             const Mask& mask, double threshold_frac,
                             std::size_t min_cells) {
  if (!(threshold_frac > 0.0 && threshold_frac < 1.0)) {
    throw Error(ErrorKind::Domain, "blob threshold must lie in (0, 1)");
  }
  double peak = 0.0;
  for (std::size_t k = 0; k < j0.size(); ++k) {
    if (selected(mask, k)) peak = std::max(peak, std::abs(j0[k]));
  }
  std::vector<Blob> blobs;
  if (peak <= 0.0) return blobs;
  const double cut = threshold_frac * peak;
  const double dv = grid.cell_volume();

  // Iterative flood fill; 0 = unvisited, 1 = visited.
  std::vector<unsigned char> seen(j0.size(), 0);
  std::vector<std::size_t> stack;
  auto inside = [&](std::size_t k) {
    return !seen[k] && selected(mask, k) && std::abs(j0[k]) > cut;
  };
  for (std::size_t start = 0; start < j0.size(); ++start) {
    if (!inside(start)) continue;
    Blob b;
    double wx = 0.0, wy = 0.0, w = 0.0;
    seen[start] = 1;
    stack.assign(1, start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const double a = std::abs(j0[k]);
      const Point2 p = grid.point(k);
      ++b.cells;
      w += a;
      wx += a * p.x;
      wy += a * p.y;
      const std::size_t i = k % grid.nx, j = k / grid.nx;
      auto push = [&](std::size_t n) {
        if (inside(n)) {
          seen[n] = 1;
          stack.push_back(n);
        }
      };
      if (i > 0) push(k - 1);
      if (i + 1 < grid.nx) push(k + 1);
      if (grid.dim == 2) {
        if (j > 0) push(k - grid.nx);
        if (j + 1 < grid.ny) push(k + grid.nx);
      }
    }
    if (b.cells < min_cells) continue;
    b.charge = w * dv;
    b.centroid = {wx / w, wy / w};
    blobs.push_back(b);
  }
  std::stable_sort(blobs.begin(), blobs.end(),
                   [](const Blob& a, const Blob& b) { return a.charge > b.charge; });
  return blobs;
}

std::size_t count_blobs(const FieldState& state, const Mask& mask,
                        double threshold_frac, std::size_t min_cells) {
  return find_blobs(state.grid, charge_density(state), mask, threshold_frac,
                    min_cells)
      .size();
}

std::optional<Point2> centroid(const FieldState& state, const Mask& mask,
                               double threshold_frac, double floor) {
  const auto j0 = charge_density(state);
  double peak = 0.0, total = 0.0;
  for (std::size_t k = 0; k < j0.size(); ++k) {
    if (!selected(mask, k)) continue;
    peak = std::max(peak, std::abs(j0[k]));
    total += std::abs(j0[k]);
  }
  if (total * state.grid.cell_volume() < floor) return std::nullopt;
  const double cut = threshold_frac * peak;
  double w = 0.0, wx = 0.0, wy = 0.0;
  for (std::size_t k = 0; k < j0.size(); ++k) {
    const double a = std::abs(j0[k]);
    if (!selected(mask, k) || a <= cut) continue;
    const Point2 p = state.grid.point(k);
    w += a;
    wx += a * p.x;
    wy += a * p.y;
  }
  return Point2{wx / w, wy / w};
}

}  // namespace qball
