#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qball/diagnostics.hpp"
#include "qball/error.hpp"
#include "qball/evolve.hpp"
#include "qball/profile1d.hpp"
#include "qball/profile2d.hpp"

using namespace qball;

namespace {

Grid grid1d(std::size_t nx, double dx, double dt) {
  Grid g;
  g.nx = nx;
  g.dx = g.dy = dx;
  g.dt = dt;
  return g;
}

TrajectorySample sample(double t, double x, double y, double vx, double vy,
                        std::size_t blobs = 1) {
  TrajectorySample s;
  s.t = t;
  s.position = {x, y};
  s.velocity = {vx, vy};
  s.blobs = blobs;
  s.charge = 1.0;
  s.parent_charge = 1.0;
  return s;
}

// Straight line through `from` with velocity v, sampled every 0.5.
Trajectory straight(Point2 from, Point2 v, double t_end, int dim = 2) {
  Trajectory t;
  t.grid = dim == 2 ? Grid::default_2d() : Grid::default_1d();
  t.obstruction = dim == 2 ? ObstructionSpec::disk(0.9, {0.0, 0.0})
                           : ObstructionSpec::interval(0.1);
  for (double s = 0.0; s <= t_end; s += 0.5) {
    t.samples.push_back(sample(s, from.x + v.x * s, from.y + v.y * s, v.x, v.y));
  }
  return t;
}

}  // namespace

TEST_CASE("densities of the exact Q-ball") {
  const Grid g = Grid::default_1d();
  const FieldState s = field_from_exact({1.9, 0.0, 0.0, 0.0}, g);
  const auto j0 = charge_density(s);
  for (std::size_t k = 0; k < g.nx; k += 97) {
    const double f = exact_profile(g.x(k), 1.9);
    CHECK(j0[k] == doctest::Approx(1.9 * f * f).epsilon(1e-12));
  }
  const LambdaField lam = LambdaField::uniform(g);
  const auto e = energy_density(s, lam);
  for (double v : e) CHECK(v >= 0.0);
  CHECK(std::abs(total_charge(s) - 0.6371) / 0.6371 < 1e-3);
  CHECK(std::abs(total_energy(s, lam) - 1.2528) / 1.2528 < 2e-3);
  CHECK(std::abs(total_momentum(s).x) < 1e-12);

  const FieldState b = field_from_exact({1.9, 0.0999, 0.0, 0.0}, g);
  CHECK(std::abs(total_energy(b, lam) - 1.2591) / 1.2591 < 2e-3);
  CHECK(total_charge(b) == doctest::Approx(total_charge(s)).epsilon(1e-6));
  // Momentum of a boosted Q-ball is gamma M u.
  const double p = total_momentum(b).x;
  CHECK(p > 0.0);
  CHECK(p == doctest::Approx(energy_of_moving(1.9, 0.0999) * 0.0999).epsilon(1e-3));
}

TEST_CASE("a real field carries no charge") {
  const Grid g = grid1d(201, 0.1, 0.05);
  FieldState s(g);
  for (std::size_t k = 0; k < g.nx; ++k) {
    s.re[k] = std::exp(-g.x(k) * g.x(k));
    s.vre[k] = 0.3 * s.re[k];
  }
  CHECK(total_charge(s) == 0.0);
  CHECK(count_blobs(s) == 0);
  CHECK_FALSE(centroid(s));
}

TEST_CASE("region masks") {
  const Grid g = grid1d(201, 0.1, 0.05);
  const Mask m = region_mask(g, ObstructionSpec::interval(-0.1, -2.0, 2.0));
  std::size_t inside = 0;
  for (auto c : m) inside += c;
  CHECK(inside == 41);
  const Mask c = complement(m, g.size());
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(m[k] + c[k] == 1);
  CHECK(region_mask(g, ObstructionSpec::none()).size() == g.size());
}

TEST_CASE("centroid and blob counting") {
  const Grid g = Grid::default_1d();
  FieldState one = field_from_exact({1.9, 0.0, -15.0, 0.0}, g);
  const auto c = centroid(one);
  REQUIRE(c);
  CHECK(c->x == doctest::Approx(-15.0).epsilon(1e-9));
  CHECK(count_blobs(one) == 1);

  const FieldState other = field_from_exact({1.9, 0.0, 15.0, 0.0}, g);
  FieldState two = one;
  for (std::size_t k = 0; k < g.nx; ++k) two.set(k, one.phi(k) + other.phi(k), one.phi_dot(k) + other.phi_dot(k));
  CHECK(count_blobs(two) == 2);
  const auto mid = centroid(two);
  REQUIRE(mid);
  CHECK(std::abs(mid->x) < 1e-9);

  // Restricting the mask to the right half selects the right Q-ball.
  Mask right(g.size(), 0);
  for (std::size_t k = 0; k < g.nx; ++k) right[k] = g.x(k) > 0.0;
  CHECK(count_blobs(two, right) == 1);
  CHECK(centroid(two, right)->x == doctest::Approx(15.0).epsilon(1e-6));

  const auto blobs = find_blobs(g, charge_density(two), {}, 0.05);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].charge == doctest::Approx(blobs[1].charge).epsilon(1e-9));
  CHECK(blobs[0].charge >= blobs[1].charge);

  // A two-cell spike is below the minimum size.
  FieldState spike = one;
  spike.re[100] = spike.re[101] = 0.5;
  spike.vim[100] = spike.vim[101] = 1.0;
  CHECK(count_blobs(spike) == 1);
  CHECK(count_blobs(spike, {}, 0.05, 2) == 2);

  CHECK_THROWS_AS(count_blobs(one, {}, 0.0), Error);
  CHECK_THROWS_AS(count_blobs(one, {}, 1.5), Error);
}

TEST_CASE("2D blobs use 4-neighbour connectivity") {
  Grid g;
  g.dim = 2;
  g.nx = g.ny = 10;
  g.dx = g.dy = 1.0;
  g.dt = 0.5;
  std::vector<double> j0(g.size(), 0.0);
  // Two diagonal 2x2 squares touching at one corner.
  for (auto [i, j] : {std::pair{2, 2}, {3, 2}, {2, 3}, {3, 3}, {4, 4}, {5, 4}, {4, 5}, {5, 5}}) {
    j0[g.index(i, j)] = 1.0;
  }
  const auto blobs = find_blobs(g, j0, {}, 0.5, 3);
  REQUIRE(blobs.size() == 2);
  CHECK(blobs[0].cells == 4);
  j0[g.index(4, 3)] = 1.0;
  CHECK(find_blobs(g, j0, {}, 0.5, 3).size() == 1);
}

TEST_CASE("velocity fit") {
  std::vector<TrajectorySample> ss;
  for (int k = 0; k < 30; ++k) ss.push_back(sample(0.5 * k, 1.0 + 0.2 * 0.5 * k, -0.1 * 0.5 * k, 0, 0));
  const Point2 v = fit_velocity(ss, ss.size() - 1, 10);
  CHECK(v.x == doctest::Approx(0.2));
  CHECK(v.y == doctest::Approx(-0.1));
}

TEST_CASE("outcome classification") {
  const ObstructionSpec barrier = ObstructionSpec::interval(0.1);
  auto ending_at = [&](double x, double v) {
    Trajectory t;
    t.obstruction = barrier;
    t.grid = Grid::default_1d();
    t.samples.push_back(sample(0.0, -20.0, 0.0, 0.1, 0.0));
    t.samples.push_back(sample(1.0, x, 0.0, v, 0.0));
    return t;
  };
  CHECK(classify(ending_at(16.0, 0.1)).outcome == Outcome::Transmitted);
  CHECK(classify(ending_at(-16.0, -0.1)).outcome == Outcome::Reflected);
  CHECK(classify(ending_at(3.0, 0.1)).outcome == Outcome::Trapped);
  CHECK(classify(ending_at(12.0, 0.1)).outcome == Outcome::Undecided);
  CHECK(classify(ending_at(-16.0, 0.1)).outcome == Outcome::Undecided);
  CHECK(outcome_decided(ending_at(16.0, 0.1)));
  CHECK_FALSE(outcome_decided(ending_at(3.0, 0.1)));
  CHECK(to_string(Outcome::Transmitted) == "transmitted");

  Trajectory none;
  CHECK(classify(none).outcome == Outcome::Undecided);
}

TEST_CASE("fission needs persistence") {
  Trajectory t;
  t.obstruction = ObstructionSpec::interval(-0.5);
  t.grid = Grid::default_1d();
  for (int k = 0; k < 40; ++k) t.samples.push_back(sample(k, 0.0, 0.0, 0.0, 0.0, k >= 20 ? 3 : 1));
  CHECK(classify(t).fission == 3);
  CHECK(classify(t).fissioned());
  CHECK(late_blob_count(t) == 3);

  Trajectory flicker = t;
  for (int k = 0; k < 40; ++k) flicker.samples[k].blobs = k % 3 == 0 ? 2 : 1;
  CHECK(classify(flicker).fission == 0);
}

TEST_CASE("deflection angle from a free-flight fit") {
  // Passing at y = 10 without interaction.
  const Trajectory pass = straight({-9.0, 10.0}, {0.1, 0.0}, 150.0);
  const auto th = deflection_angle(pass);
  REQUIRE(th);
  CHECK(std::abs(*th) < 1e-9);

  // Outgoing at 30 degrees from the origin.
  Trajectory bent;
  bent.grid = Grid::default_2d();
  bent.obstruction = ObstructionSpec::disk(0.9, {0.0, 0.0});
  const double a = 30.0 * M_PI / 180.0;
  for (double s = 0.0; s <= 200.0; s += 0.5) {
    const Point2 p = s < 100 ? Point2{-10.0 + 0.1 * s, 0.0}
                             : Point2{0.1 * std::cos(a) * (s - 100), 0.1 * std::sin(a) * (s - 100)};
    bent.samples.push_back(sample(s, p.x, p.y, 0, 0));
  }
  DeflectionOptions near;
  near.free_radius = 6.0;
  CHECK_FALSE(deflection_angle(bent));
  REQUIRE(deflection_angle(bent, near));
  CHECK(*deflection_angle(bent, near) == doctest::Approx(30.0).epsilon(1e-9));

  // Mirror image gives the opposite sign.
  Trajectory mirrored = bent;
  for (auto& s : mirrored.samples) s.position.y = -s.position.y;
  CHECK(*deflection_angle(mirrored, near) == doctest::Approx(-30.0).epsilon(1e-9));

  // Head-on reflection folds to 180.
  Trajectory back;
  back.grid = Grid::default_2d();
  back.obstruction = ObstructionSpec::disk(0.9, {0.0, 0.0});
  for (double s = 0.0; s <= 200.0; s += 0.5) {
    const double x = s < 30 ? -9.0 + 0.1 * s : -6.0 - 0.05 * (s - 30);
    back.samples.push_back(sample(s, x, 1e-9 * s, 0, 0));
  }
  REQUIRE(deflection_angle(back));
  CHECK(*deflection_angle(back) == 180.0);

  // A later rebound off the edge stays out of the fit.
  Trajectory rebound;
  rebound.grid = Grid::default_2d();
  rebound.obstruction = back.obstruction;
  for (double s = 0.0; s <= 200.0; s += 0.5) {
    const double x = s < 30 ? -9.0 + 0.1 * s : s < 130 ? -6.0 - 0.05 * (s - 30) : -11.0 + 0.08 * (s - 130);
    rebound.samples.push_back(sample(s, x, 1e-9 * s, 0, 0));
  }
  REQUIRE(deflection_angle(rebound));
  CHECK(*deflection_angle(rebound) == 180.0);

  // Never leaves the obstruction neighbourhood.
  Trajectory stuck = straight({-1.0, 0.0}, {0.0, 0.0}, 50.0);
  CHECK_FALSE(deflection_angle(stuck));
}

TEST_CASE("CSV output") {
  Trajectory t = straight({-9.0, 2.0}, {0.1, 0.0}, 1.0);
  t.samples[0].energy = 1.0 / 3.0;
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t,x,y,ux,uy,Q,E,Px,Py,blobs");
  std::getline(in, line);
  CHECK(line == "0,-9,2,0.1,0,1,0.333333333333,0,0,1");

  Trajectory one = straight({-9.0, 0.0}, {0.1, 0.0}, 1.0, 1);
  std::ostringstream out1;
  write_trajectory_csv(out1, one);
  CHECK(out1.str().rfind("t,x,ux,Q,E,Px,blobs\n", 0) == 0);

  CHECK(trajectory_file_name("fig3", 1.9, 0.0, 0.01) == "fig3_1.9_0_0.01.csv");
  CHECK_THROWS_AS(write_trajectory_csv("/nonexistent-dir/x.csv", one), Error);
}

TEST_CASE("recorder follows a moving Q-ball") {
  const Grid g = grid1d(1601, 0.05, 0.0125);
  const QBallSpec q{1.9, 0.2, -10.0, 0.0};
  FieldState s = field_from_exact(q, g);
  const LambdaField lam = LambdaField::uniform(g);
  Evolver ev(g, lam);
  TrajectoryRecorder rec(q, ObstructionSpec::none(), lam);
  RunOptions opt;
  opt.t_end = 20.0;
  std::vector<Observer> obs{[&](const FieldState& st) {
    rec.record(st);
    return true;
  }};
  run(s, ev, opt, obs);
  const Trajectory& t = rec.trajectory();
  REQUIRE(t.samples.size() == 41);
  CHECK(t.back().position.x == doctest::Approx(-6.0).epsilon(5e-3));
  CHECK(t.back().velocity.x == doctest::Approx(0.2).epsilon(0.02));
  CHECK(t.back().blobs == 1);
  CHECK(t.back().charge == doctest::Approx(t.samples.front().charge).epsilon(1e-6));
}

TEST_CASE("recorder tracks the largest fragment in 2D") {
  const Grid g = Grid::default_2d();
  const RadialProfile big = shoot_profile(1.6), small = shoot_profile(1.9);
  const FieldState a = field_from_radial(big, {1.6, 0.0, -6.0, 0.0}, g).state;
  const FieldState b = field_from_radial(small, {1.9, 0.0, 6.0, 0.0}, g).state;
  FieldState s = a;
  for (std::size_t k = 0; k < s.size(); ++k) s.set(k, a.phi(k) + b.phi(k), a.phi_dot(k) + b.phi_dot(k));
  const LambdaField lam = LambdaField::uniform(g);
  TrajectoryRecorder rec({1.6, 0.0, -6.0, 0.0}, ObstructionSpec::none(), lam);
  rec.record(s);
  const auto& smp = rec.trajectory().back();
  CHECK(smp.blobs == 2);
  CHECK(smp.position.x == doctest::Approx(-6.0).epsilon(1e-3));
  CHECK(std::abs(smp.position.y) < 1e-9);
  CHECK(smp.parent_charge < smp.charge);
}
