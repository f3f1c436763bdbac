#include "qball/profile1d.hpp"

#include <cmath>
#include <string>

#include "qball/error.hpp"
#include "qball/model.hpp"
#include "quadrature.hpp"

namespace qball {

namespace {

// Beyond this argument cosh overflows; the profile is zero to double
// precision long before that.
constexpr double kMaxCoshArg = 700.0;

struct ProfileShape {
  double scale;  // lambda^(-1/2) (4 lambda - omega^2)
  double b;      // 2 sqrt(lambda)
  double c;      // sqrt(2 omega^2 - 4 lambda)
  double k;      // 2 sqrt(4 lambda - omega^2)
};

ProfileShape shape(double omega, double lambda) {
  require_existence(omega, lambda);
  const double w2 = omega * omega;
  const double a = 4.0 * lambda - w2;
  return {a / std::sqrt(lambda), 2.0 * std::sqrt(lambda),
          std::sqrt(2.0 * w2 - 4.0 * lambda), 2.0 * std::sqrt(a)};
}

double profile_from_shape(double x, const ProfileShape& s) {
  const double arg = s.k * std::abs(x);
  if (arg > kMaxCoshArg) return 0.0;
  return std::sqrt(s.scale / (s.b + s.c * std::cosh(arg)));
}

double slope_from_shape(double x, const ProfileShape& s) {
  const double arg = s.k * x;
  if (std::abs(arg) > kMaxCoshArg) return 0.0;
  const double f = profile_from_shape(x, s);
  return -0.5 * f * s.c * s.k * std::sinh(arg) / (s.b + s.c * std::cosh(arg));
}

double omega_prime(double omega) {
  return std::sqrt(2.0 * omega * omega - 4.0);
}

}  // namespace

double QBallSpec::gamma() const { return 1.0 / std::sqrt(1.0 - u * u); }

void QBallSpec::validate() const {
  require_existence(omega, 1.0);
  if (!(std::abs(u) < 1.0)) {
    throw Error(ErrorKind::Domain, "launch velocity must satisfy |u| < 1");
  }
  if (!std::isfinite(x0) || !std::isfinite(y0)) {
    throw Error(ErrorKind::Domain, "Q-ball position must be finite");
  }
}

void require_existence(double omega, double lambda) {
  if (!(lambda > 0.0)) {
    throw Error(ErrorKind::Domain, "profile requires lambda > 0");
  }
  const auto range = omega_bounds(lambda);
  const double w = std::abs(omega);
  if (!(w > range.lower)) {
    throw Error(ErrorKind::Existence,
                "|omega| = " + std::to_string(w) +
                    " is not above the lower bound omega_- = " +
                    std::to_string(range.lower));
  }
  if (!(w < range.upper)) {
    throw Error(ErrorKind::Existence,
                "|omega| = " + std::to_string(w) +
                    " is not below the upper bound omega_+ = " +
                    std::to_string(range.upper));
  }
}

double exact_profile(double x, double omega, double lambda) {
  return profile_from_shape(x, shape(omega, lambda));
}

double exact_profile_slope(double x, double omega, double lambda) {
  return slope_from_shape(x, shape(omega, lambda));
}

FieldValue boosted_field(double x, double t, const QBallSpec& spec) {
  spec.validate();
  const auto s = shape(spec.omega, 1.0);
  const double g = spec.gamma();
  const double xi = g * (x - spec.x0 - spec.u * t);
  const double phase = spec.omega * g * (t - spec.u * (x - spec.x0));
  const std::complex<double> rot = std::polar(1.0, phase);
  const double f = profile_from_shape(xi, s);
  const double fp = slope_from_shape(xi, s);
  const std::complex<double> dot(-g * spec.u * fp, spec.omega * g * f);
  return {f * rot, dot * rot};
}

FieldState field_from_exact(const QBallSpec& spec, const Grid& grid) {
  if (grid.dim != 1) throw Error(ErrorKind::Config, "field_from_exact needs a 1D grid");
  spec.validate();
  FieldState s(grid);
  for (std::size_t i = 0; i < grid.nx; ++i) {
    const FieldValue v = boosted_field(grid.x(i), 0.0, spec);
    s.set(i, v.phi, v.phi_dot);
  }
  return s;
}

double charge_closed_form(double omega, double u) {
  require_existence(omega, 1.0);
  if (!(std::abs(u) < 1.0)) {
    throw Error(ErrorKind::Domain, "charge_closed_form requires |u| < 1");
  }
  const double wp = omega_prime(omega);
  return std::sqrt(2.0) * omega * std::atanh(std::sqrt((2.0 - wp) / (2.0 + wp)));
}

double mass_closed_form(double omega) {
  const double q = charge_closed_form(omega, 0.0);
  const double w2 = omega * omega;
  return 0.5 * std::sqrt(4.0 - w2) + 0.5 * (w2 + 2.0) * q / omega;
}

double energy_of_moving(double omega, double u) {
  if (!(std::abs(u) < 1.0)) {
    throw Error(ErrorKind::Domain, "energy_of_moving requires |u| < 1");
  }
  return mass_closed_form(omega) / std::sqrt(1.0 - u * u);
}

double energy_prefactor_formula(double omega, double u) {
  if (!(std::abs(u) < 1.0)) {
    throw Error(ErrorKind::Domain, "energy formula requires |u| < 1");
  }
  const double g2 = 1.0 / (1.0 - u * u);
  const double q = std::sqrt(g2) * charge_closed_form(omega, 0.0);
  const double w2 = omega * omega;
  return 0.25 * (g2 * (u * u + 1.0) + 1.0) *
         (std::sqrt(4.0 - w2) + (w2 + 2.0) * q / omega);
}

double critical_velocity_energy(double m_rest, double e_top) {
  if (!(m_rest > 0.0)) {
    throw Error(ErrorKind::Domain, "rest mass must be positive");
  }
  if (!(e_top >= m_rest)) {
    throw Error(ErrorKind::Domain,
                "barrier-top energy is below the rest mass; nothing to climb");
  }
  const double r = m_rest / e_top;
  return std::sqrt(1.0 - r * r);
}

double critical_velocity_barrier(double lambda0) {
  if (!(lambda0 >= 0.0)) {
    throw Error(ErrorKind::Domain,
                "critical_velocity_barrier needs a barrier (lambda0 >= 0); "
                "holes have no barrier-top energy bound");
  }
  return std::sqrt(lambda0 / (1.0 + lambda0));
}

ProfileIntegrals quadrature_integrals(double omega, double lambda) {
  const auto s = shape(omega, lambda);
  constexpr double kHalfWidth = 40.0;
  constexpr double kPanel = 5.0;
  constexpr double kTol = 1e-10;
  const int panels = static_cast<int>(kHalfWidth / kPanel);
  const double panel_tol = kTol / (2.0 * panels);

  auto half_integral = [&](auto&& integrand) {
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
      total += detail::adaptive_simpson(integrand, p * kPanel, (p + 1) * kPanel,
                                        panel_tol);
    }
    return 2.0 * total;
  };

  ProfileIntegrals out;
  out.i2 = half_integral([&](double x) {
    const double f = profile_from_shape(x, s);
    return f * f;
  });
  out.i4 = half_integral([&](double x) {
    const double f = profile_from_shape(x, s);
    return f * f * f * f;
  });
  out.i6 = half_integral([&](double x) {
    const double f2 = profile_from_shape(x, s);
    const double f = f2 * f2;
    return f * f * f;
  });
  out.ix = half_integral([&](double x) {
    const double fp = slope_from_shape(x, s);
    return fp * fp;
  });
  return out;
}

ClosedFormObservables closed_form_observables(double omega, double u) {
  ClosedFormObservables out;
  out.charge = charge_closed_form(omega, u);
  out.i2 = out.charge / omega;
  out.mass = mass_closed_form(omega);
  out.energy = energy_of_moving(omega, u);
  out.omega_prime = omega_prime(omega);
  return out;
}

}  // namespace qball
