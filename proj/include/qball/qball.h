/* C interface to the Q-ball scattering library.
 *
 * Every function returns a qball_status. On failure a message describing the
 * problem is available from qball_last_error() on the same thread until the
 * next call. Objects are opaque handles released with the matching _free
 * function; strings returned through char** are released with
 * qball_string_free.
 */
#ifndef QBALL_QBALL_H
#define QBALL_QBALL_H

#include <stddef.h>

#if defined(_WIN32)
#  ifdef QBALL_BUILDING_LIBRARY
#    define QBALL_API __declspec(dllexport)
#  else
#    define QBALL_API __declspec(dllimport)
#  endif
#else
#  define QBALL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qball_status {
  QBALL_OK = 0,
  QBALL_ERR_DOMAIN = 1,      /* argument outside the mathematical domain */
  QBALL_ERR_EXISTENCE = 2,   /* omega outside the existence range */
  QBALL_ERR_CONFIG = 3,      /* invalid configuration or unknown name */
  QBALL_ERR_NUMERICAL = 4,   /* quadrature or shooting failed to converge */
  QBALL_ERR_BLOWUP = 5,      /* evolution produced non-finite values */
  QBALL_ERR_BRACKET = 6,     /* bisection bracket is not a bracket */
  QBALL_ERR_IO = 7,          /* file could not be read or written */
  QBALL_ERR_ARGUMENT = 8,    /* null pointer or mismatched buffer size */
  QBALL_ERR_INTERNAL = 9
} qball_status;

QBALL_API const char* qball_version(void);
QBALL_API const char* qball_status_name(qball_status status);
/* Message of the last failure on this thread; empty after success. */
QBALL_API const char* qball_last_error(void);
QBALL_API void qball_string_free(char* s);

/* ---- analytic quantities ------------------------------------------------ */

typedef struct qball_observables {
  double i2;               /* integral of f^2 */
  double charge;           /* Noether charge, Lorentz invariant */
  double mass;             /* rest energy */
  double energy;           /* gamma * mass */
  double energy_prefactor; /* prefactor closed form, for comparison */
  double omega_prime;      /* sqrt(2 omega^2 - 4) */
} qball_observables;

QBALL_API qball_status qball_exact_profile(double x, double omega, double lambda,
                                           double* f);
QBALL_API qball_status qball_closed_form(double omega, double u,
                                         qball_observables* out);
/* Integrals of f^2, f^4, f^6 and f'^2 by adaptive quadrature. */
QBALL_API qball_status qball_profile_integrals(double omega, double lambda,
                                               double out[4]);
QBALL_API qball_status qball_stability_mass(double lambda, double* m);
QBALL_API qball_status qball_omega_bounds(double lambda, double* lower,
                                          double* upper);
QBALL_API qball_status qball_critical_velocity_barrier(double lambda0,
                                                       double* u_cr);
QBALL_API qball_status qball_critical_velocity_energy(double m_rest,
                                                      double e_top,
                                                      double* u_cr);
/* *found is 0 when E/Q stays below 2 sqrt(lambda) for every omega. */
QBALL_API qball_status qball_stability_intersection(double u, double lambda,
                                                    double* omega, int* found);

/* ---- radial profiles ---------------------------------------------------- */

typedef struct qball_profile qball_profile;

/* r_max <= 0 or dr <= 0 select the defaults (20 and 1e-3). */
QBALL_API qball_status qball_profile_shoot(double omega, double lambda,
                                           double r_max, double dr,
                                           qball_profile** out);
QBALL_API qball_status qball_profile_value(const qball_profile* p, double r,
                                           double* f);
QBALL_API qball_status qball_profile_info(const qball_profile* p, double* f0,
                                          double* r_max, double* match_radius);
/* Two columns "r f"; every stride-th sample. */
QBALL_API qball_status qball_profile_write(const qball_profile* p,
                                           const char* path, size_t stride);
QBALL_API void qball_profile_free(qball_profile* p);

/* ---- single simulations ------------------------------------------------- */

typedef enum qball_region_kind {
  QBALL_REGION_NONE = 0,
  QBALL_REGION_INTERVAL = 1, /* region = {lo, hi} */
  QBALL_REGION_DISK = 2      /* region = {cx, cy, radius} */
} qball_region_kind;

typedef struct qball_sim_params {
  int dim;
  double omega, u, x0, y0;
  double lambda0;
  qball_region_kind region_kind;
  double region[3];
  size_t nx, ny;
  double dx, dy, dt;
  double absorber_width, absorber_sigma_max;
  unsigned threads;
} qball_sim_params;

typedef struct qball_sim_state {
  double t;
  double charge;
  double energy;
  double px, py;
  int has_centroid;
  double cx, cy;
  size_t blobs;
} qball_sim_state;

typedef struct qball_sim qball_sim;

/* Fills the defaults for a 1D or 2D run (reference grid, free Q-ball at rest). */
QBALL_API qball_status qball_sim_params_default(int dim, qball_sim_params* p);
QBALL_API qball_status qball_sim_create(const qball_sim_params* p,
                                        qball_sim** out);
QBALL_API qball_status qball_sim_step(qball_sim* sim, size_t steps);
/* Steps until t >= t_end. */
QBALL_API qball_status qball_sim_advance(qball_sim* sim, double t_end);
QBALL_API qball_status qball_sim_observe(const qball_sim* sim,
                                         qball_sim_state* out);
QBALL_API qball_status qball_sim_shape(const qball_sim* sim, size_t* nx,
                                       size_t* ny);
/* Copies the field; any pointer may be null. n must equal nx * ny. */
QBALL_API qball_status qball_sim_field(const qball_sim* sim, double* re,
                                       double* im, double* re_dot,
                                       double* im_dot, size_t n);
QBALL_API qball_status qball_sim_save(const qball_sim* sim, const char* path);
/* Replaces the state with a checkpoint taken on the same grid. */
QBALL_API qball_status qball_sim_restore(qball_sim* sim, const char* path);
QBALL_API void qball_sim_free(qball_sim* sim);

/* ---- scenarios ---------------------------------------------------------- */

/* Zero (or negative) fields leave the config value unchanged. */
typedef struct qball_overrides {
  double dx;
  double dt;
  double t_end;
  unsigned threads;
} qball_overrides;

typedef void (*qball_progress_fn)(const char* message, void* user);

/* Parses and validates a JSON config; *resolved receives the config with
 * all defaults filled in. */
QBALL_API qball_status qball_config_resolve(const char* json_text,
                                            const qball_overrides* overrides,
                                            char** resolved);
/* Runs a scenario. out_dir may be null to skip file output. source_path is
 * recorded in the manifest and may be null. */
QBALL_API qball_status qball_run_config(const char* json_text,
                                        const char* source_path,
                                        const char* out_dir,
                                        const qball_overrides* overrides,
                                        qball_progress_fn progress, void* user,
                                        char** summary_json);
/* JSON array of {"name", "description"}. */
QBALL_API qball_status qball_reproduce_list(char** json);
QBALL_API qball_status qball_reproduce(const char* name, const char* out_dir,
                                       const qball_overrides* overrides,
                                       qball_progress_fn progress, void* user,
                                       char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* QBALL_QBALL_H */
