#include "qball/qball.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <memory>
#include <new>
#include <string>

#include "qball/diagnostics.hpp"
#include "qball/error.hpp"
#include "qball/evolve.hpp"
#include "qball/experiments.hpp"
#include "qball/profile1d.hpp"
#include "qball/profile2d.hpp"

#ifndef QBALL_VERSION
#define QBALL_VERSION "dev"
#endif

struct qball_profile {
  qball::RadialProfile profile;
};

struct qball_sim {
  qball::FieldState state;
  qball::LambdaField lambda;
  std::unique_ptr<qball::Evolver> evolver;
};

namespace {

thread_local std::string g_last_error;

qball_status status_of(qball::ErrorKind kind) {
  using qball::ErrorKind;
  switch (kind) {
    case ErrorKind::Domain: return QBALL_ERR_DOMAIN;
    case ErrorKind::Existence: return QBALL_ERR_EXISTENCE;
    case ErrorKind::Config: return QBALL_ERR_CONFIG;
    case ErrorKind::Numerical: return QBALL_ERR_NUMERICAL;
    case ErrorKind::Blowup: return QBALL_ERR_BLOWUP;
    case ErrorKind::Bracket: return QBALL_ERR_BRACKET;
    case ErrorKind::Io: return QBALL_ERR_IO;
  }
  return QBALL_ERR_INTERNAL;
}

qball_status fail(qball_status s, const std::string& message) {
  g_last_error = message;
  return s;
}

// Runs `f`, translating exceptions into status codes.
template <class F>
qball_status guarded(F&& f) {
  try {
    g_last_error.clear();
    f();
    return QBALL_OK;
  } catch (const qball::Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(QBALL_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QBALL_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QBALL_ERR_INTERNAL, "unknown exception");
  }
}

#define QBALL_REQUIRE(cond, what) \
  if (!(cond)) return fail(QBALL_ERR_ARGUMENT, what)

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void apply_overrides(qball::ScenarioConfig& c, const qball_overrides* o) {
  if (!o) return;
  if (o->dx > 0.0) c.grid = qball::regrid(c.grid, o->dx);
  if (o->dt > 0.0) c.grid.dt = o->dt;
  if (o->t_end > 0.0) c.t_end = o->t_end;
  if (o->threads > 0) c.threads = o->threads;
}

qball::ProgressFn progress_fn(qball_progress_fn cb, void* user) {
  if (!cb) return {};
  return [cb, user](const std::string& m) { cb(m.c_str(), user); };
}

}  // namespace

extern "C" {

const char* qball_version(void) { return QBALL_VERSION; }

const char* qball_status_name(qball_status s) {
  switch (s) {
    case QBALL_OK: return "ok";
    case QBALL_ERR_DOMAIN: return "domain error";
    case QBALL_ERR_EXISTENCE: return "existence error";
    case QBALL_ERR_CONFIG: return "config error";
    case QBALL_ERR_NUMERICAL: return "numerical error";
    case QBALL_ERR_BLOWUP: return "blowup";
    case QBALL_ERR_BRACKET: return "bracket error";
    case QBALL_ERR_IO: return "io error";
    case QBALL_ERR_ARGUMENT: return "invalid argument";
    case QBALL_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

const char* qball_last_error(void) { return g_last_error.c_str(); }

void qball_string_free(char* s) { std::free(s); }

qball_status qball_exact_profile(double x, double omega, double lambda, double* f) {
  QBALL_REQUIRE(f, "f is null");
  return guarded([&] { *f = qball::exact_profile(x, omega, lambda); });
}

qball_status qball_closed_form(double omega, double u, qball_observables* out) {
  QBALL_REQUIRE(out, "out is null");
  return guarded([&] {
    const auto c = qball::closed_form_observables(omega, u);
    *out = {c.i2, c.charge, c.mass, c.energy,
            qball::energy_prefactor_formula(omega, u), c.omega_prime};
  });
}

qball_status qball_profile_integrals(double omega, double lambda, double out[4]) {
  QBALL_REQUIRE(out, "out is null");
  return guarded([&] {
    const auto p = qball::quadrature_integrals(omega, lambda);
    out[0] = p.i2;
    out[1] = p.i4;
    out[2] = p.i6;
    out[3] = p.ix;
  });
}

qball_status qball_stability_mass(double lambda, double* m) {
  QBALL_REQUIRE(m, "m is null");
  return guarded([&] { *m = qball::stability_mass(lambda); });
}

qball_status qball_omega_bounds(double lambda, double* lower, double* upper) {
  QBALL_REQUIRE(lower && upper, "output pointer is null");
  return guarded([&] {
    const auto r = qball::omega_bounds(lambda);
    *lower = r.lower;
    *upper = r.upper;
  });
}

qball_status qball_critical_velocity_barrier(double lambda0, double* u_cr) {
  QBALL_REQUIRE(u_cr, "u_cr is null");
  return guarded([&] { *u_cr = qball::critical_velocity_barrier(lambda0); });
}

qball_status qball_critical_velocity_energy(double m_rest, double e_top, double* u_cr) {
  QBALL_REQUIRE(u_cr, "u_cr is null");
  return guarded([&] { *u_cr = qball::critical_velocity_energy(m_rest, e_top); });
}

qball_status qball_stability_intersection(double u, double lambda, double* omega,
                                          int* found) {
  QBALL_REQUIRE(omega && found, "output pointer is null");
  return guarded([&] {
    const auto w = qball::stability_intersection(u, lambda);
    *found = w ? 1 : 0;
    *omega = w.value_or(0.0);
  });
}

qball_status qball_profile_shoot(double omega, double lambda, double r_max, double dr,
                                 qball_profile** out) {
  QBALL_REQUIRE(out, "out is null");
  *out = nullptr;
  return guarded([&] {
    qball::ShootOptions opt;
    if (r_max > 0.0) opt.r_max = r_max;
    if (dr > 0.0) opt.dr = dr;
    *out = new qball_profile{qball::shoot_profile(omega, lambda, opt)};
  });
}

qball_status qball_profile_value(const qball_profile* p, double r, double* f) {
  QBALL_REQUIRE(p && f, "null argument");
  return guarded([&] { *f = p->profile.value(r); });
}

qball_status qball_profile_info(const qball_profile* p, double* f0, double* r_max,
                                double* match_radius) {
  QBALL_REQUIRE(p, "profile is null");
  if (f0) *f0 = p->profile.center_value();
  if (r_max) *r_max = p->profile.r_max();
  if (match_radius) *match_radius = p->profile.match_radius();
  g_last_error.clear();
  return QBALL_OK;
}

qball_status qball_profile_write(const qball_profile* p, const char* path, size_t stride) {
  QBALL_REQUIRE(p && path, "null argument");
  return guarded([&] {
    std::ofstream out(path);
    if (!out) throw qball::Error(qball::ErrorKind::Io, std::string("cannot open ") + path);
    p->profile.write(out, stride);
  });
}

void qball_profile_free(qball_profile* p) { delete p; }

qball_status qball_sim_params_default(int dim, qball_sim_params* p) {
  QBALL_REQUIRE(p, "params is null");
  QBALL_REQUIRE(dim == 1 || dim == 2, "dim must be 1 or 2");
  const auto g = dim == 1 ? qball::Grid::default_1d() : qball::Grid::default_2d();
  const auto a = qball::AbsorberSpec::default_for(dim);
  *p = qball_sim_params{};
  p->dim = dim;
  p->omega = 1.9;
  p->region_kind = QBALL_REGION_NONE;
  p->nx = g.nx;
  p->ny = g.ny;
  p->dx = g.dx;
  p->dy = g.dy;
  p->dt = g.dt;
  p->absorber_width = a.width;
  p->absorber_sigma_max = a.sigma_max;
  p->threads = 1;
  g_last_error.clear();
  return QBALL_OK;
}

qball_status qball_sim_create(const qball_sim_params* p, qball_sim** out) {
  QBALL_REQUIRE(p && out, "null argument");
  *out = nullptr;
  return guarded([&] {
    qball::Grid g{p->dim, p->nx, p->dim == 1 ? 1 : p->ny, p->dx,
                  p->dim == 1 ? p->dx : p->dy, p->dt};
    g.validate();
    qball::ObstructionSpec obs;
    switch (p->region_kind) {
      case QBALL_REGION_NONE: break;
      case QBALL_REGION_INTERVAL:
        obs = qball::ObstructionSpec::interval(p->lambda0, p->region[0], p->region[1]);
        break;
      case QBALL_REGION_DISK:
        obs = qball::ObstructionSpec::disk(p->lambda0, {p->region[0], p->region[1]},
                                           p->region[2]);
        break;
      default:
        throw qball::Error(qball::ErrorKind::Config, "unknown region kind");
    }
    const qball::QBallSpec q{p->omega, p->u, p->x0, p->y0};
    auto sim = std::make_unique<qball_sim>();
    if (g.dim == 1) {
      sim->state = qball::field_from_exact(q, g);
    } else {
      q.validate();
      sim->state = qball::field_from_radial(qball::shoot_profile(std::abs(p->omega)), q, g).state;
    }
    sim->lambda = qball::LambdaField(g, obs);
    qball::AbsorberSpec a{p->absorber_width, p->absorber_sigma_max, 1.0};
    sim->evolver = std::make_unique<qball::Evolver>(g, sim->lambda, a,
                                                    p->threads ? p->threads : 1);
    *out = sim.release();
  });
}

qball_status qball_sim_step(qball_sim* sim, size_t steps) {
  QBALL_REQUIRE(sim, "sim is null");
  return guarded([&] {
    for (size_t n = 0; n < steps; ++n) sim->evolver->step(sim->state);
  });
}

qball_status qball_sim_advance(qball_sim* sim, double t_end) {
  QBALL_REQUIRE(sim, "sim is null");
  return guarded([&] {
    qball::RunOptions opt;
    opt.t_end = t_end;
    opt.observe_every = t_end;  // no observers attached
    qball::run(sim->state, *sim->evolver, opt, {});
  });
}

qball_status qball_sim_observe(const qball_sim* sim, qball_sim_state* out) {
  QBALL_REQUIRE(sim && out, "null argument");
  return guarded([&] {
    const auto& s = sim->state;
    *out = qball_sim_state{};
    out->t = s.t;
    out->charge = qball::total_charge(s);
    out->energy = qball::total_energy(s, sim->lambda);
    const auto p = qball::total_momentum(s);
    out->px = p.x;
    out->py = p.y;
    if (const auto c = qball::centroid(s)) {
      out->has_centroid = 1;
      out->cx = c->x;
      out->cy = c->y;
    }
    out->blobs = qball::count_blobs(s);
  });
}

qball_status qball_sim_shape(const qball_sim* sim, size_t* nx, size_t* ny) {
  QBALL_REQUIRE(sim && nx && ny, "null argument");
  *nx = sim->state.grid.nx;
  *ny = sim->state.grid.ny;
  g_last_error.clear();
  return QBALL_OK;
}

qball_status qball_sim_field(const qball_sim* sim, double* re, double* im,
                             double* re_dot, double* im_dot, size_t n) {
  QBALL_REQUIRE(sim, "sim is null");
  const auto& s = sim->state;
  QBALL_REQUIRE(n == s.size(), "buffer size does not match the grid");
  auto copy = [n](double* dst, const std::vector<double>& src) {
    if (dst) std::memcpy(dst, src.data(), n * sizeof(double));
  };
  copy(re, s.re);
  copy(im, s.im);
  copy(re_dot, s.vre);
  copy(im_dot, s.vim);
  g_last_error.clear();
  return QBALL_OK;
}

qball_status qball_sim_save(const qball_sim* sim, const char* path) {
  QBALL_REQUIRE(sim && path, "null argument");
  return guarded([&] { qball::save_checkpoint(path, sim->state); });
}

qball_status qball_sim_restore(qball_sim* sim, const char* path) {
  QBALL_REQUIRE(sim && path, "null argument");
  return guarded([&] {
    auto loaded = qball::load_checkpoint(path);
    const auto& g = sim->state.grid;
    const auto& h = loaded.grid;
    if (h.dim != g.dim || h.nx != g.nx || h.ny != g.ny || h.dx != g.dx ||
        h.dy != g.dy) {
      throw qball::Error(qball::ErrorKind::Config,
                         "checkpoint grid does not match the simulation");
    }
    loaded.grid.dt = g.dt;
    sim->state = std::move(loaded);
  });
}

void qball_sim_free(qball_sim* sim) { delete sim; }

qball_status qball_config_resolve(const char* json_text, const qball_overrides* overrides,
                                  char** resolved) {
  QBALL_REQUIRE(json_text && resolved, "null argument");
  *resolved = nullptr;
  return guarded([&] {
    auto c = qball::config_from_json(json_text);
    apply_overrides(c, overrides);
    c.validate();
    *resolved = duplicate(qball::config_to_json(c));
  });
}

qball_status qball_run_config(const char* json_text, const char* source_path,
                              const char* out_dir, const qball_overrides* overrides,
                              qball_progress_fn progress, void* user,
                              char** summary_json) {
  QBALL_REQUIRE(json_text, "config text is null");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    auto c = qball::config_from_json(json_text);
    apply_overrides(c, overrides);
    if (out_dir) c.out_dir = out_dir;
    if (source_path) c.source = source_path;
    const auto rep = qball::run_scenario(c, progress_fn(progress, user));
    if (summary_json) *summary_json = duplicate(rep.summary_json);
  });
}

qball_status qball_reproduce_list(char** json) {
  QBALL_REQUIRE(json, "null argument");
  *json = nullptr;
  return guarded([&] {
    std::string s = "[";
    bool first = true;
    for (const auto& t : qball::reproduce_targets()) {
      s += first ? "" : ",";
      s += "{\"name\":\"" + t.name + "\",\"description\":\"" + t.description + "\"}";
      first = false;
    }
    s += "]";
    *json = duplicate(s);
  });
}

qball_status qball_reproduce(const char* name, const char* out_dir,
                             const qball_overrides* overrides, qball_progress_fn progress,
                             void* user, char** summary_json) {
  QBALL_REQUIRE(name, "name is null");
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    const auto text = qball::run_reproduce(
        name, out_dir ? out_dir : "",
        [overrides](qball::ScenarioConfig& c) { apply_overrides(c, overrides); },
        progress_fn(progress, user));
    if (summary_json) *summary_json = duplicate(text);
  });
}

}  // extern "C"
