#include <doctest.h>

#include <cmath>

#include "qball/error.hpp"
#include "qball/model.hpp"

using namespace qball;

TEST_CASE("potential derivative agrees with a centred difference") {
  for (double lambda : {0.1, 1.0, 1.9}) {
    for (double f = 0.0; f <= 1.5; f += 0.05) {
      const double h = 1e-5;
      const double fd =
          (potential_value(f + h, lambda) - potential_value(f - h, lambda)) / (2 * h);
      CHECK(potential_deriv(f, lambda) == doctest::Approx(fd).epsilon(1e-8));
    }
  }
}

TEST_CASE("potential has the sextic shape") {
  CHECK(potential_value(0.0, 1.0) == 0.0);
  CHECK(potential_value(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(potential_value(1.0, 0.5) == doctest::Approx(0.5));
  // Positive everywhere away from the origin: 2 - 2 f^2 + f^4 > 0.
  for (double f = 0.01; f < 3.0; f += 0.01) CHECK(potential_value(f, 1.0) > 0.0);
}

TEST_CASE("stability mass") {
  CHECK(stability_mass(1.0) == doctest::Approx(2.0));
  CHECK(stability_mass(1.1) == doctest::Approx(2.0976).epsilon(5e-5));
  CHECK(stability_mass(0.1) == doctest::Approx(0.6325).epsilon(5e-5));
  CHECK(stability_mass(0.9) == doctest::Approx(1.8974).epsilon(5e-5));
  CHECK_THROWS_AS(stability_mass(0.0), Error);
  CHECK_THROWS_AS(stability_mass(-0.5), Error);
}

TEST_CASE("omega bounds and effective curvature") {
  const OmegaRange r = omega_bounds(1.0);
  CHECK(r.lower == doctest::Approx(std::sqrt(2.0)));
  CHECK(r.upper == doctest::Approx(2.0));
  CHECK(r.contains(1.9));
  CHECK(r.contains(-1.9));
  CHECK_FALSE(r.contains(2.0));
  CHECK_FALSE(r.contains(std::sqrt(2.0)));
  const OmegaRange r4 = omega_bounds(4.0);
  CHECK(r4.lower == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(r4.upper == doctest::Approx(4.0));

  for (double lambda : {0.5, 1.0, 1.5}) {
    const double up = omega_bounds(lambda).upper;
    for (double w = 0.5; w < 3.0; w += 0.013) {
      CHECK((effective_curvature_at_origin(w, lambda) < 0.0) == (w < up));
    }
  }
}

TEST_CASE("lambda field of an interval obstruction") {
  const auto barrier = ObstructionSpec::interval(0.1);
  CHECK(barrier.is_barrier());
  CHECK(barrier.lambda_at({0.0, 0.0}) == doctest::Approx(1.1));
  CHECK(barrier.lambda_at({12.0, 0.0}) == 1.0);
  CHECK(barrier.lambda_at({-10.0, 0.0}) == doctest::Approx(1.1));
  CHECK(barrier.lambda_at({10.0, 0.0}) == doctest::Approx(1.1));
  CHECK(barrier.lambda_at({10.000001, 0.0}) == 1.0);
  const auto ext = barrier.x_extent();
  REQUIRE(ext);
  CHECK(ext->first == -10.0);
  CHECK(ext->second == 10.0);
}

TEST_CASE("lambda field of disks") {
  const auto hole = ObstructionSpec::disk(-0.9, {0.0, 11.5});
  CHECK(hole.is_hole());
  CHECK(hole.lambda_at({0.0, 11.5}) == doctest::Approx(0.1));
  CHECK(hole.lambda_at({5.0, 11.5}) == doctest::Approx(0.1));
  CHECK(hole.lambda_at({0.0, 0.0}) == 1.0);

  const auto two = ObstructionSpec::disks(-0.9, {{{0.0, 11.5}, 5.0}, {{0.0, -11.5}, 5.0}});
  CHECK(two.lambda_at({0.0, -11.5}) == doctest::Approx(0.1));
  CHECK(two.lambda_at({0.0, 11.5}) == doctest::Approx(0.1));
  CHECK(two.lambda_at({0.0, 0.0}) == 1.0);
}

TEST_CASE("obstruction validation") {
  CHECK_THROWS_AS(ObstructionSpec::interval(-1.0), Error);
  CHECK_THROWS_AS(ObstructionSpec::interval(-1.5), Error);
  CHECK_THROWS_AS(ObstructionSpec::interval(0.1, 5.0, -5.0), Error);
  CHECK_THROWS_AS(ObstructionSpec::disk(0.1, {0, 0}, 0.0), Error);
  try {
    ObstructionSpec::interval(-2.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
  }
  const auto none = ObstructionSpec::none();
  CHECK(none.is_none());
  CHECK_FALSE(none.is_barrier());
  CHECK_FALSE(none.is_hole());
  CHECK(none.lambda_at({0.0, 0.0}) == 1.0);
  CHECK_FALSE(none.x_extent());
}
