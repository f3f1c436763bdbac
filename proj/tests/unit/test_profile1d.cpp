#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qball/error.hpp"
#include "qball/profile1d.hpp"

using namespace qball;

namespace {

// Independent evaluation of f and f'' from g = f^2 = a / (B + C cosh(k x)).
struct Oracle {
  double a, B, C, k;
  Oracle(double w, double lambda) {
    const double A = 4 * lambda - w * w;
    a = A / std::sqrt(lambda);
    B = 2 * std::sqrt(lambda);
    C = std::sqrt(2 * w * w - 4 * lambda);
    k = 2 * std::sqrt(A);
  }
  double f(double x) const { return std::sqrt(a / (B + C * std::cosh(k * x))); }
  double f2(double x) const {
    const double D = B + C * std::cosh(k * x);
    const double g = a / D;
    const double g1 = -a * C * k * std::sinh(k * x) / (D * D);
    const double g2 = -a * C * k * k * std::cosh(k * x) / (D * D) +
                      2 * a * C * C * k * k * std::pow(std::sinh(k * x), 2) / (D * D * D);
    return g2 / (2 * std::sqrt(g)) - g1 * g1 / (4 * g * std::sqrt(g));
  }
};

double residual(double x, double w, double lambda) {
  const Oracle o(w, lambda);
  const double f = exact_profile(x, w, lambda);
  return o.f2(x) + (w * w - 4 * lambda) * f + 8 * lambda * f * f * f -
         6 * lambda * std::pow(f, 5);
}

// Composite Simpson on [-L, L].
template <class F>
double simpson(F&& g, double L = 40.0, int n = 80000) {
  const double h = 2 * L / n;
  double s = g(-L) + g(L);
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * g(-L + i * h);
  return s * h / 3;
}

}  // namespace

TEST_CASE("exact profile solves the profile equation") {
  for (double lambda : {1.0, 1.1}) {
    for (double w : {1.5, 1.7, 1.9}) {
      double worst = 0.0;
      for (int i = 0; i < 1000; ++i) {
        const double x = -10.0 + 20.0 * i / 999.0;
        worst = std::max(worst, std::abs(residual(x, w, lambda)));
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("exact profile matches the oracle and its slope") {
  const Oracle o(1.9, 1.0);
  CHECK(exact_profile(0.0, 1.9) == doctest::Approx(0.320596).epsilon(1e-6));
  for (double x = -8; x <= 8; x += 0.37) {
    CHECK(exact_profile(x, 1.9) == doctest::Approx(o.f(x)).epsilon(1e-13));
    const double h = 1e-5;
    const double fd = (exact_profile(x + h, 1.9) - exact_profile(x - h, 1.9)) / (2 * h);
    CHECK(exact_profile_slope(x, 1.9) == doctest::Approx(fd).epsilon(1e-7));
    CHECK(exact_profile(x, 1.9) == exact_profile(-x, 1.9));
  }
}

TEST_CASE("existence range is enforced") {
  CHECK_THROWS_AS(exact_profile(0.0, 2.0), Error);
  CHECK_THROWS_AS(exact_profile(0.0, 1.4), Error);
  CHECK_THROWS_AS(require_existence(2.1, 1.0), Error);
  CHECK_NOTHROW(require_existence(2.05, 1.1));
  try {
    require_existence(2.5);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Existence);
  }
  QBallSpec s;
  s.u = 1.0;
  CHECK_THROWS_AS(s.validate(), Error);
  s.u = 0.5;
  s.omega = -1.9;
  CHECK_NOTHROW(s.validate());
}

TEST_CASE("closed forms agree with density quadrature") {
  for (double w : {1.5, 1.6, 1.7, 1.8, 1.9}) {
    const Oracle o(w, 1.0);
    const double i2 = simpson([&](double x) { return std::pow(o.f(x), 2); });
    const double mass = simpson([&](double x) {
      const double f = o.f(x);
      const double h = 1e-4;
      const double fp = (o.f(x + h) - o.f(x - h)) / (2 * h);
      return 0.5 * fp * fp + 0.5 * w * w * f * f + 2 * f * f - 2 * std::pow(f, 4) +
             std::pow(f, 6);
    });
    CHECK(charge_closed_form(w) == doctest::Approx(w * i2).epsilon(1e-6));
    CHECK(mass_closed_form(w) == doctest::Approx(mass).epsilon(1e-6));

    const ProfileIntegrals q = quadrature_integrals(w);
    CHECK(q.i2 == doctest::Approx(i2).epsilon(1e-8));
    const double m_from_q = 0.5 * q.ix + 0.5 * w * w * q.i2 + 2 * q.i2 - 2 * q.i4 + q.i6;
    CHECK(mass_closed_form(w) == doctest::Approx(m_from_q).epsilon(1e-6));
  }
}

TEST_CASE("rest masses and charge at omega 1.9") {
  const double w[] = {1.5, 1.6, 1.7, 1.8, 1.9};
  const double m[] = {3.2159, 2.6167, 2.1892, 1.7684, 1.2528};
  for (int i = 0; i < 5; ++i) {
    CHECK(std::abs(mass_closed_form(w[i]) - m[i]) < 5e-5);
  }
  CHECK(std::abs(charge_closed_form(1.9) - 0.6371) < 5e-5);
}

TEST_CASE("moving energies") {
  const double g = 1 / std::sqrt(1 - 0.01);
  CHECK(energy_of_moving(1.9, 0.1) == doctest::Approx(g * mass_closed_form(1.9)));
  CHECK(energy_of_moving(1.9, 0.0999) == doctest::Approx(1.2591).epsilon(1e-4));
  CHECK(energy_prefactor_formula(1.9, 0.0) == doctest::Approx(mass_closed_form(1.9)));
  CHECK(charge_closed_form(1.9, 0.5) == charge_closed_form(1.9));
  const auto obs = closed_form_observables(1.9, 0.1);
  CHECK(obs.omega_prime == doctest::Approx(std::sqrt(2 * 1.9 * 1.9 - 4)));
  CHECK(obs.energy == doctest::Approx(energy_of_moving(1.9, 0.1)));
}

TEST_CASE("critical velocity closed forms") {
  CHECK(std::abs(critical_velocity_barrier(0.01) - 0.0995) < 5e-5);
  CHECK(std::abs(critical_velocity_barrier(0.1) - 0.3015) < 5e-5);
  CHECK(critical_velocity_barrier(0.0) == 0.0);
  CHECK_THROWS_AS(critical_velocity_barrier(-0.1), Error);
  CHECK(std::abs(critical_velocity_energy(1.2528, 1.2591) - 0.0999) < 1e-4);
  CHECK_THROWS_AS(critical_velocity_energy(1.3, 1.2), Error);
  // Energy on top of the barrier is M sqrt(1 + lambda0): both forms agree.
  for (double l0 : {0.01, 0.1, 0.5}) {
    const double M = mass_closed_form(1.7);
    CHECK(critical_velocity_energy(M, M * std::sqrt(1 + l0)) ==
          doctest::Approx(critical_velocity_barrier(l0)));
  }
}

TEST_CASE("boosted field time derivative matches finite differences") {
  QBallSpec s{1.8, 0.3, -2.0, 0.0};
  for (double x = -6; x <= 4; x += 0.5) {
    const double h = 1e-5;
    const auto a = boosted_field(x, 0.7 + h, s).phi;
    const auto b = boosted_field(x, 0.7 - h, s).phi;
    const auto d = boosted_field(x, 0.7, s).phi_dot;
    CHECK(std::abs(d - (a - b) / (2 * h)) < 1e-7);
  }
  // Amplitude is the contracted profile.
  const double g = s.gamma();
  CHECK(std::abs(boosted_field(-2.0 + 1.0 / g, 0.0, s).phi) ==
        doctest::Approx(exact_profile(1.0, 1.8)));
}

TEST_CASE("sampled 1D field carries the closed-form charge") {
  Grid g = Grid::default_1d();
  const FieldState st = field_from_exact({1.9, 0.0, -15.0, 0.0}, g);
  REQUIRE(st.size() == g.size());
  double q = 0.0;
  for (std::size_t k = 0; k < st.size(); ++k) q += st.re[k] * st.vim[k] - st.im[k] * st.vre[k];
  q *= g.dx;
  CHECK(q == doctest::Approx(charge_closed_form(1.9)).epsilon(1e-6));
}
