#include "qball/grid.hpp"

#include <algorithm>
#include <cmath>

#include "qball/error.hpp"

namespace qball {

Grid Grid::default_1d() { return Grid{1, 12001, 1, 0.01, 0.01, 0.0025}; }

Grid Grid::default_2d() { return Grid{2, 300, 300, 0.1, 0.1, 0.02}; }

void Grid::validate() const {
  if (dim != 1 && dim != 2) {
    throw Error(ErrorKind::Config, "grid dimension must be 1 or 2");
  }
  if (nx < 5 || (dim == 2 && ny < 5)) {
    throw Error(ErrorKind::Config, "grid needs at least 5 points per axis");
  }
  if (dim == 1 && ny != 1) {
    throw Error(ErrorKind::Config, "1D grid must have ny = 1");
  }
  if (!(dx > 0.0) || !(dy > 0.0) || !(dt > 0.0)) {
    throw Error(ErrorKind::Config, "grid spacings and dt must be positive");
  }
  const double h = dim == 1 ? dx : std::min(dx, dy);
  if (!(dt < h)) {
    throw Error(ErrorKind::Config, "time step must satisfy dt < dx");
  }
}

FieldState::FieldState(const Grid& g)
    : grid(g),
      re(g.size(), 0.0),
      im(g.size(), 0.0),
      vre(g.size(), 0.0),
      vim(g.size(), 0.0) {}

bool FieldState::all_finite() const noexcept {
  auto finite = [](const std::vector<double>& a) {
    return std::all_of(a.begin(), a.end(),
                       [](double v) { return std::isfinite(v); });
  };
  return finite(re) && finite(im) && finite(vre) && finite(vim);
}

LambdaField::LambdaField(const Grid& grid, const ObstructionSpec& obstruction)
    : lambda_(grid.size(), 1.0) {
  if (obstruction.is_none()) return;
  for (std::size_t k = 0; k < lambda_.size(); ++k) {
    lambda_[k] = obstruction.lambda_at(grid.point(k));
  }
}

LambdaField LambdaField::uniform(const Grid& grid, double value) {
  LambdaField out;
  out.lambda_.assign(grid.size(), value);
  return out;
}

}  // namespace qball
