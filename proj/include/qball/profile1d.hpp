#pragma once

// Exact one-dimensional Q-ball profiles and their closed-form observables.
//
// For constant lambda the profile ODE f'' + (omega^2 - 4 lambda) f
// + 8 lambda f^3 - 6 lambda f^5 = 0 has the exact solution
//
//   f(x) = lambda^(-1/4) sqrt( (4 lambda - omega^2) /
//          (2 sqrt(lambda) + sqrt(2 omega^2 - 4 lambda) cosh(2 x sqrt(4 lambda - omega^2))) )
//
// which exists for 2 lambda < omega^2 < 4 lambda.

#include <complex>

#include "qball/grid.hpp"

namespace qball {

/// Initial Q-ball: internal frequency, launch velocity along +x and centre.
/// Negative omega is an anti-Q-ball.
struct QBallSpec {
  double omega = 1.9;
  double u = 0.0;
  double x0 = 0.0;
  double y0 = 0.0;

  double gamma() const;

  /// Throws Error(Existence) if |omega| is outside (sqrt 2, 2) and
  /// Error(Domain) if |u| >= 1.
  void validate() const;
};

/// Throws Error(Existence) naming the violated bound when omega^2 is not
/// inside (2 lambda, 4 lambda).
void require_existence(double omega, double lambda = 1.0);

double exact_profile(double x, double omega, double lambda = 1.0);

/// df/dx of exact_profile.
double exact_profile_slope(double x, double omega, double lambda = 1.0);

struct FieldValue {
  std::complex<double> phi;
  std::complex<double> phi_dot;
};

/// Lorentz-boosted exact profile at (x, t):
///   Phi = f(gamma (x - x0 - u t)) exp(i omega gamma (t - u (x - x0)))
/// with the analytic time derivative.
FieldValue boosted_field(double x, double t, const QBallSpec& spec);

/// Samples boosted_field at t = 0 on a 1D grid.
FieldState field_from_exact(const QBallSpec& spec, const Grid& grid);

/// Noether charge omega * integral f^2 dx of the exact lambda = 1 profile.
/// The charge is a Lorentz scalar, so u only enters through validation.
double charge_closed_form(double omega, double u = 0.0);

/// Rest energy.
double mass_closed_form(double omega);

/// gamma * M(omega).
double energy_of_moving(double omega, double u);

/// Closed form with the (gamma^2 (u^2 + 1) + 1) / 4 prefactor and a
/// gamma-scaled charge. It coincides with M at u = 0 but not with gamma M
/// otherwise; reported next to energy_of_moving for comparison only.
double energy_prefactor_formula(double omega, double u);

/// sqrt(1 - (m_rest / e_top)^2); Error(Domain) when e_top < m_rest.
double critical_velocity_energy(double m_rest, double e_top);

/// sqrt(lambda0 / (1 + lambda0)) for a barrier of height lambda0 >= 0.
double critical_velocity_barrier(double lambda0);

struct ProfileIntegrals {
  double i2 = 0.0;  // integral f^2
  double i4 = 0.0;  // integral f^4
  double i6 = 0.0;  // integral f^6
  double ix = 0.0;  // integral f'^2
};

/// Adaptive Simpson over [-40, 40] (absolute tolerance 1e-10, using parity).
ProfileIntegrals quadrature_integrals(double omega, double lambda = 1.0);

struct ClosedFormObservables {
  double i2 = 0.0;
  double charge = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  /// sqrt(2 omega^2 - 4)
  double omega_prime = 0.0;
};

ClosedFormObservables closed_form_observables(double omega, double u = 0.0);

}  // namespace qball
