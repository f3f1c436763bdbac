#include <doctest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "qball/diagnostics.hpp"
#include "qball/error.hpp"
#include "qball/evolve.hpp"
#include "qball/profile1d.hpp"
#include "qball/profile2d.hpp"

using namespace qball;

namespace {

Grid grid1d(std::size_t nx, double dx, double dt) {
  Grid g;
  g.dim = 1;
  g.nx = nx;
  g.ny = 1;
  g.dx = g.dy = dx;
  g.dt = dt;
  return g;
}

Grid grid2d(std::size_t n, double dx, double dt) {
  Grid g;
  g.dim = 2;
  g.nx = g.ny = n;
  g.dx = g.dy = dx;
  g.dt = dt;
  return g;
}

void advance(FieldState& s, Evolver& ev, int steps) {
  for (int i = 0; i < steps; ++i) ev.step(s);
}

double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
  return m;
}

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("right-hand side reproduces the analytic Laplacian and potential force") {
  const Grid g = grid1d(801, 0.02, 0.01);
  FieldState s(g);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    s.re[i] = 0.5 * std::exp(-x * x);
    s.im[i] = 0.3 * std::exp(-x * x / 2);
    s.vre[i] = 0.1;
  }
  const LambdaField lam(g, ObstructionSpec::interval(0.2, -1.0, 1.0));
  const FieldState r = rhs(s, lam);
  for (std::size_t i = 100; i < g.nx - 100; i += 7) {
    const double x = g.x(i);
    const double a = 0.5 * std::exp(-x * x), b = 0.3 * std::exp(-x * x / 2);
    const double lap_a = 0.5 * (4 * x * x - 2) * std::exp(-x * x);
    const double lap_b = 0.3 * (x * x - 1) * std::exp(-x * x / 2);
    const double rho = a * a + b * b;
    const double l = std::abs(x) <= 1.0 ? 1.2 : 1.0;
    const double force = 2 * l * (2 - 4 * rho + 3 * rho * rho);
    CHECK(r.re[i] == doctest::Approx(0.1));
    CHECK(r.im[i] == 0.0);
    CHECK(std::abs(r.vre[i] - (lap_a - force * a)) < 1e-3);
    CHECK(std::abs(r.vim[i] - (lap_b - force * b)) < 1e-3);
  }
}

TEST_CASE("absorber profile") {
  const Grid g = Grid::default_1d();
  const Absorber a(g, AbsorberSpec::default_for(1));
  CHECK(a.sigma(g.nx / 2) == 0.0);
  CHECK(a.sigma(0) == doctest::Approx(5.0));
  CHECK(a.sigma(g.nx - 1) == doctest::Approx(5.0));
  // Quadratic ramp: half way into the layer gives a quarter of the maximum.
  const std::size_t mid = 250;  // x = -57.5
  CHECK(a.sigma(mid) == doctest::Approx(1.25));
  CHECK_FALSE(a.in_layer(600));  // x = -54
  CHECK(AbsorberSpec::default_for(2).width == 2.0);

  AbsorberSpec bad;
  bad.sigma_max = 1000.0;
  CHECK_THROWS_AS(Absorber(g, bad), Error);
}

TEST_CASE("sponge absorbs an outgoing wave packet") {
  const Grid g = grid1d(2401, 0.05, 0.0125);
  FieldState s(g);
  const double k = 3.0, w = std::sqrt(k * k + 4), A = 1e-3;
  for (std::size_t i = 0; i < g.nx; ++i) {
    const double x = g.x(i);
    const auto phi = A * std::exp(-std::pow((x - 40.0) / 3.0, 2)) * std::polar(1.0, k * x);
    s.set(i, phi, std::complex<double>(0, -w) * phi);
  }
  const LambdaField lam = LambdaField::uniform(g);
  const Absorber absorber(g, AbsorberSpec::default_for(1));
  auto interior_energy = [&](const FieldState& st) {
    const auto e = energy_density(st, lam);
    double sum = 0.0;
    for (std::size_t i = 0; i < g.nx; ++i)
      if (!absorber.in_layer(i)) sum += e[i];
    return sum;
  };
  const double e0 = interior_energy(s);
  Evolver ev(g, lam);
  advance(s, ev, static_cast<int>(60.0 / g.dt));
  CHECK(interior_energy(s) / e0 < 0.02);
}

TEST_CASE("free Q-ball conserves charge and energy") {
  const Grid g = Grid::default_1d();
  FieldState s = field_from_exact({1.9, 0.1, -10.0, 0.0}, g);
  const LambdaField lam = LambdaField::uniform(g);
  const double q0 = total_charge(s), e0 = total_energy(s, lam);
  CHECK(e0 == doctest::Approx(energy_of_moving(1.9, 0.1)).epsilon(1e-4));
  Evolver ev(g, lam);
  advance(s, ev, 8000);
  CHECK(s.t == doctest::Approx(20.0));
  CHECK(std::abs(total_charge(s) / q0 - 1) < 1e-5);
  CHECK(std::abs(total_energy(s, lam) / e0 - 1) < 1e-5);
}

TEST_CASE("RK4 phase error falls by 16 when dt halves") {
  const Grid base = grid1d(401, 0.1, 0.04);
  auto phase_after = [&](double dt) {
    Grid g = base;
    g.dt = dt;
    FieldState s = field_from_exact({1.9, 0.0, 0.0, 0.0}, g);
    const LambdaField lam = LambdaField::uniform(g);
    const int n = static_cast<int>(std::lround(8.0 / dt));
    for (int i = 0; i < n; ++i) step_rk4(s, lam, dt);
    return s.phi(g.nx / 2);
  };
  const auto ref = phase_after(0.0025);
  const double e1 = std::abs(std::arg(phase_after(0.04) / ref));
  const double e2 = std::abs(std::arg(phase_after(0.02) / ref));
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.125));
}

TEST_CASE("stationary Q-ball rotates at omega") {
  const Grid g = grid1d(2001, 0.02, 0.005);
  FieldState s = field_from_exact({1.8, 0.0, 0.0, 0.0}, g);
  const auto c0 = s.phi(g.nx / 2);
  Evolver ev(g, LambdaField::uniform(g));
  advance(s, ev, 400);
  const auto c1 = s.phi(g.nx / 2);
  CHECK(std::abs(c1) == doctest::Approx(std::abs(c0)).epsilon(1e-4));
  CHECK(std::arg(c1 / c0) == doctest::Approx(std::remainder(1.8 * 2.0, 2 * M_PI)).epsilon(1e-3));
}

TEST_CASE("global phase rotation commutes with evolution") {
  const Grid g = grid1d(1201, 0.05, 0.0125);
  const LambdaField lam(g, ObstructionSpec::interval(0.3, -5.0, 5.0));
  FieldState a = field_from_exact({1.7, 0.3, -12.0, 0.0}, g);
  FieldState b = a;
  const auto rot = std::polar(1.0, 0.731);
  for (std::size_t k = 0; k < b.size(); ++k) b.set(k, rot * a.phi(k), rot * a.phi_dot(k));
  Evolver ea(g, lam), eb(g, lam);
  advance(a, ea, 800);
  advance(b, eb, 800);
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(rot * a.phi(k) - b.phi(k)));
    worst = std::max(worst, std::abs(rot * a.phi_dot(k) - b.phi_dot(k)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("anti-Q-ball evolves as the complex conjugate") {
  const Grid g = grid1d(1201, 0.05, 0.0125);
  const LambdaField lam(g, ObstructionSpec::interval(-0.4, -5.0, 5.0));
  FieldState a = field_from_exact({1.7, 0.2, -12.0, 0.0}, g);
  FieldState b = field_from_exact({-1.7, 0.2, -12.0, 0.0}, g);
  CHECK(max_diff(a.re, b.re) == 0.0);
  Evolver ea(g, lam), eb(g, lam);
  advance(a, ea, 800);
  advance(b, eb, 800);
  for (std::size_t k = 0; k < a.size(); ++k) {
    CHECK(a.re[k] == b.re[k]);
    CHECK(a.im[k] == -b.im[k]);
  }
  CHECK(total_charge(a) == doctest::Approx(-total_charge(b)));
}

TEST_CASE("parity is preserved") {
  const Grid g = grid1d(1201, 0.05, 0.0125);
  const LambdaField lam(g, ObstructionSpec::interval(0.5, -3.0, 3.0));
  FieldState s(g);
  const FieldState l = field_from_exact({1.8, 0.3, -10.0, 0.0}, g);
  for (std::size_t i = 0; i < g.nx; ++i) {
    const std::size_t m = g.nx - 1 - i;
    s.set(i, l.phi(i) + l.phi(m), l.phi_dot(i) + l.phi_dot(m));
  }
  Evolver ev(g, lam);
  advance(s, ev, 2000);
  double worst = 0.0;
  for (std::size_t i = 0; i < g.nx; ++i) {
    worst = std::max(worst, std::abs(s.phi(i) - s.phi(g.nx - 1 - i)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("2D evolution is mirror symmetric in y and thread independent") {
  const Grid g = grid2d(100, 0.2, 0.04);
  const RadialProfile p = shoot_profile(1.8);
  const QBallSpec q{1.8, 0.3, -5.0, 0.0};
  const FieldState init = field_from_radial(p, q, g).state;
  const LambdaField up(g, ObstructionSpec::disk(0.5, {0.0, 4.0}, 3.0));
  const LambdaField down(g, ObstructionSpec::disk(0.5, {0.0, -4.0}, 3.0));
  const AbsorberSpec abs = AbsorberSpec::default_for(2);

  FieldState a = init, b = init, c = init;
  Evolver ea(g, up, abs, 1), eb(g, down, abs, 1), ec(g, up, abs, 3);
  advance(a, ea, 100);
  advance(b, eb, 100);
  advance(c, ec, 100);

  double worst = 0.0;
  for (std::size_t j = 0; j < g.ny; ++j) {
    for (std::size_t i = 0; i < g.nx; ++i) {
      const auto ka = g.index(i, j), kb = g.index(i, g.ny - 1 - j);
      worst = std::max(worst, std::abs(a.phi(ka) - b.phi(kb)));
    }
  }
  CHECK(worst < 1e-12);
  CHECK(a.re == c.re);
  CHECK(a.im == c.im);
  CHECK(a.vre == c.vre);
  CHECK(a.vim == c.vim);
}

TEST_CASE("blowup is detected") {
  const Grid g = grid1d(101, 0.1, 0.05);
  FieldState s(g);
  s.re[50] = 50.0;
  Evolver ev(g, LambdaField::uniform(g));
  CHECK_THROWS_AS(advance(s, ev, 10), BlowupError);

  FieldState n(g);
  n.im[10] = std::nan("");
  Evolver ev2(g, LambdaField::uniform(g));
  try {
    ev2.step(n);
    FAIL("expected blowup");
  } catch (const BlowupError& e) {
    CHECK(e.kind() == ErrorKind::Blowup);
    CHECK(e.time() == doctest::Approx(g.dt));
  }
}

TEST_CASE("run invokes observers at the cadence and stops on request") {
  const Grid g = grid1d(401, 0.1, 0.05);
  FieldState s = field_from_exact({1.9, 0.0, 0.0, 0.0}, g);
  Evolver ev(g, LambdaField::uniform(g));
  std::vector<double> times;
  std::vector<Observer> obs{[&](const FieldState& st) {
    times.push_back(st.t);
    return st.t < 2.0 - 1e-9;
  }};
  RunOptions opt;
  opt.t_end = 10.0;
  opt.observe_every = 0.5;
  const RunResult r = run(s, ev, opt, obs);
  CHECK(r.stopped_by_observer);
  REQUIRE(times.size() == 5);
  CHECK(times.front() == 0.0);
  CHECK(times.back() == doctest::Approx(2.0));

  times.clear();
  FieldState s2 = field_from_exact({1.9, 0.0, 0.0, 0.0}, g);
  std::vector<Observer> all{[&](const FieldState& st) {
    times.push_back(st.t);
    return true;
  }};
  const RunResult r2 = run(s2, ev, opt, all);
  CHECK_FALSE(r2.stopped_by_observer);
  CHECK(r2.t == doctest::Approx(10.0));
  CHECK(r2.steps == 200);
  CHECK(times.size() == 21);
}

TEST_CASE("checkpoints round-trip exactly") {
  const Grid g = grid2d(40, 0.25, 0.05);
  FieldState s(g);
  for (std::size_t k = 0; k < s.size(); ++k) {
    s.re[k] = std::sin(0.1 * k);
    s.im[k] = std::cos(0.37 * k);
    s.vre[k] = 1.0 / (1.0 + k);
    s.vim[k] = -1e-300 * k;
  }
  s.t = 12.375;
  const auto path = temp_file("qball_test_roundtrip.ckpt").string();
  save_checkpoint(path, s);
  CHECK(std::filesystem::file_size(path) == 80 + 4 * 8 * s.size());
  const FieldState r = load_checkpoint(path);
  CHECK(r.grid == g);
  CHECK(r.t == s.t);
  CHECK(r.re == s.re);
  CHECK(r.im == s.im);
  CHECK(r.vre == s.vre);
  CHECK(r.vim == s.vim);

  // Continuing from a checkpoint matches continuing in memory.
  const Grid g1 = grid1d(401, 0.1, 0.05);
  FieldState a = field_from_exact({1.8, 0.2, -5.0, 0.0}, g1);
  Evolver ev(g1, LambdaField::uniform(g1));
  advance(a, ev, 20);
  save_checkpoint(path, a);
  FieldState b = load_checkpoint(path);
  advance(a, ev, 20);
  Evolver ev2(g1, LambdaField::uniform(g1));
  advance(b, ev2, 20);
  CHECK(a.re == b.re);
  CHECK(a.vim == b.vim);

  std::filesystem::resize_file(path, 100);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  {
    std::ofstream bad(path, std::ios::binary | std::ios::trunc);
    bad << "NOTACKPTxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx";
  }
  try {
    load_checkpoint(path);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Io);
  }
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
}
