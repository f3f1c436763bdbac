#include "qball/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

#include "qball/error.hpp"

namespace qball {

AbsorberSpec AbsorberSpec::default_for(int dim) {
  AbsorberSpec spec;
  if (dim == 2) spec.width = 2.0;
  return spec;
}

Absorber::Absorber(const Grid& grid, const AbsorberSpec& spec)
    : spec_(spec), dt_(grid.dt) {
  if (spec.width < 0.0 || spec.sigma_max < 0.0 || spec.field_damping < 0.0) {
    throw Error(ErrorKind::Config, "absorber parameters must be non-negative");
  }
  if (spec.width == 0.0 || spec.sigma_max == 0.0) return;
  if (spec.sigma_max * (1.0 + (grid.dim == 2 ? 1.0 : 0.0)) * grid.dt >= 1.0) {
    throw Error(ErrorKind::Config, "absorber sigma_max * dt must be below 1");
  }
  auto axis_sigma = [&](double coord, double edge) {
    const double from_edge = edge - std::abs(coord);
    if (from_edge >= spec.width) return 0.0;
    const double depth = std::min(spec.width - from_edge, spec.width) / spec.width;
    return spec.sigma_max * depth * depth;
  };
  const double xe = grid.x_max();
  const double ye = grid.y_max();
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const Point2 p = grid.point(k);
    double s = axis_sigma(p.x, xe);
    if (grid.dim == 2) s += axis_sigma(p.y, ye);
    if (s > 0.0) {
      nodes_.push_back(k);
      sigma_.push_back(s);
    }
  }
}

void Absorber::apply(FieldState& state) const {
  const double kphi = spec_.field_damping;
  for (std::size_t n = 0; n < nodes_.size(); ++n) {
    const std::size_t k = nodes_[n];
    const double fv = 1.0 - sigma_[n] * dt_;
    const double fp = 1.0 - kphi * sigma_[n] * dt_;
    state.vre[k] *= fv;
    state.vim[k] *= fv;
    state.re[k] *= fp;
    state.im[k] *= fp;
  }
}

double Absorber::sigma(std::size_t k) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), k);
  if (it == nodes_.end() || *it != k) return 0.0;
  return sigma_[static_cast<std::size_t>(it - nodes_.begin())];
}

void apply_absorber(FieldState& state, const Absorber& absorber) {
  absorber.apply(state);
}

namespace {

struct Geometry {
  std::size_t nx, ny;
  int dim;
  double inv_dx2, inv_dy2;

  explicit Geometry(const Grid& g)
      : nx(g.nx),
        ny(g.ny),
        dim(g.dim),
        inv_dx2(1.0 / (g.dx * g.dx)),
        inv_dy2(1.0 / (g.dy * g.dy)) {}
};

// Laplacian of row j for columns [i0, i1), written to out[i - i0]. Edge
// nodes use a mirror ghost (zero normal derivative).
void laplacian_row(const Geometry& geo, const double* __restrict p,
                   std::size_t j, std::size_t i0, std::size_t i1,
                   double* __restrict out) {
  const std::size_t nx = geo.nx;
  const double* row = p + j * nx;
  const double cx = geo.inv_dx2;
  auto xpart = [&](std::size_t i) {
    const double left = i == 0 ? row[1] : row[i - 1];
    const double right = i == nx - 1 ? row[nx - 2] : row[i + 1];
    return (left + right - 2.0 * row[i]) * cx;
  };
  const std::size_t lo = std::max<std::size_t>(i0, 1);
  const std::size_t hi = std::min(i1, nx - 1);
  if (geo.dim == 1) {
    if (i0 == 0) out[0] = xpart(0);
    for (std::size_t i = lo; i < hi; ++i) {
      out[i - i0] = (row[i - 1] + row[i + 1] - 2.0 * row[i]) * cx;
    }
    if (i1 == nx) out[nx - 1 - i0] = xpart(nx - 1);
    return;
  }
  const std::size_t ny = geo.ny;
  const double* up = p + (j == 0 ? 1 : j - 1) * nx;
  const double* down = p + (j == ny - 1 ? ny - 2 : j + 1) * nx;
  const double cy = geo.inv_dy2;
  if (i0 == 0) out[0] = xpart(0) + (up[0] + down[0] - 2.0 * row[0]) * cy;
  for (std::size_t i = lo; i < hi; ++i) {
    out[i - i0] = (row[i - 1] + row[i + 1] - 2.0 * row[i]) * cx +
                  (up[i] + down[i] - 2.0 * row[i]) * cy;
  }
  if (i1 == nx) {
    const std::size_t i = nx - 1;
    out[i - i0] = xpart(i) + (up[i] + down[i] - 2.0 * row[i]) * cy;
  }
}

inline double force_factor(double two_lambda, double rho) {
  return two_lambda * (2.0 + rho * (-4.0 + 3.0 * rho));
}

}  // namespace

FieldState rhs(const FieldState& state, const LambdaField& lambda) {
  const Grid& g = state.grid;
  const Geometry geo(g);
  FieldState out(g);
  out.t = state.t;
  std::vector<double> lr(g.nx), li(g.nx);
  for (std::size_t j = 0; j < g.ny; ++j) {
    laplacian_row(geo, state.re.data(), j, 0, g.nx, lr.data());
    laplacian_row(geo, state.im.data(), j, 0, g.nx, li.data());
    for (std::size_t i = 0; i < g.nx; ++i) {
      const std::size_t k = j * g.nx + i;
      const double rho = state.re[k] * state.re[k] + state.im[k] * state.im[k];
      const double f = force_factor(2.0 * lambda[k], rho);
      out.re[k] = state.vre[k];
      out.im[k] = state.vim[k];
      out.vre[k] = lr[i] - f * state.re[k];
      out.vim[k] = li[i] - f * state.im[k];
    }
  }
  return out;
}

Evolver::Evolver(const Grid& grid, LambdaField lambda, AbsorberSpec absorber,
                 unsigned threads)
    : grid_(grid),
      lambda_(std::move(lambda)),
      absorber_(grid, absorber),
      threads_(std::max(1u, threads)) {
  grid_.validate();
  if (lambda_.size() != grid_.size()) {
    throw Error(ErrorKind::Config, "lambda field does not match the grid");
  }
  two_lambda_.resize(grid_.size());
  for (std::size_t k = 0; k < grid_.size(); ++k) two_lambda_[k] = 2.0 * lambda_[k];
  const std::size_t n = grid_.size();
  for (Buffers* b : {&a_, &b_, &acc_}) {
    b->re.assign(n, 0.0);
    b->im.assign(n, 0.0);
    b->vre.assign(n, 0.0);
    b->vim.assign(n, 0.0);
  }
  scratch_re_.assign(threads_, std::vector<double>(grid_.nx));
  scratch_im_.assign(threads_, std::vector<double>(grid_.nx));
}

namespace {

struct StagePointers {
  const double* cre;
  const double* cim;
  const double* cvr;
  const double* cvi;
  const double* two_lambda;
  double* ar;
  double* ai;
  double* avr;
  double* avi;
  double* sre;
  double* sim;
  double* svr;
  double* svi;
  double* ore;
  double* oim;
  double* ovr;
  double* ovi;
};

// Pointwise RK4 stage update for nodes [off, off + len); lr/li hold the
// Laplacian of the stage input for those nodes.
template <int Stage>
unsigned update_span(const double* __restrict cre, const double* __restrict cim,
                     const double* __restrict cvr, const double* __restrict cvi,
                     const double* __restrict tl, const double* __restrict lr,
                     const double* __restrict li, double* __restrict ar,
                     double* __restrict ai, double* __restrict avr,
                     double* __restrict avi, double* __restrict sre,
                     double* __restrict sim, double* __restrict svr,
                     double* __restrict svi, double* __restrict ore,
                     double* __restrict oim, double* __restrict ovr,
                     double* __restrict ovi, std::size_t len, double dt) {
  constexpr double w = (Stage == 1 || Stage == 4) ? 1.0 / 6.0 : 1.0 / 3.0;
  const double h = Stage == 3 ? dt : 0.5 * dt;
  constexpr double limit = Evolver::kBlowupLimit;
  unsigned bad = 0;
  for (std::size_t n = 0; n < len; ++n) {
    const double yr = cre[n], yi = cim[n];
    const double rho = yr * yr + yi * yi;
    const double f = force_factor(tl[n], rho);
    const double accr = lr[n] - f * yr;
    const double acci = li[n] - f * yi;
    const double vr = cvr[n], vi = cvi[n];
    if constexpr (Stage == 1) {
      ar[n] = w * vr;
      ai[n] = w * vi;
      avr[n] = w * accr;
      avi[n] = w * acci;
    } else if constexpr (Stage == 2 || Stage == 3) {
      ar[n] += w * vr;
      ai[n] += w * vi;
      avr[n] += w * accr;
      avi[n] += w * acci;
    }
    if constexpr (Stage < 4) {
      ore[n] = sre[n] + h * vr;
      oim[n] = sim[n] + h * vi;
      ovr[n] = svr[n] + h * accr;
      ovi[n] = svi[n] + h * acci;
    } else {
      const double nr = sre[n] + dt * (ar[n] + w * vr);
      const double ni = sim[n] + dt * (ai[n] + w * vi);
      const double nvr = svr[n] + dt * (avr[n] + w * accr);
      const double nvi = svi[n] + dt * (avi[n] + w * acci);
      sre[n] = nr;
      sim[n] = ni;
      svr[n] = nvr;
      svi[n] = nvi;
      // NaN fails every comparison, so non-finite values count as bad.
      const unsigned ok = static_cast<unsigned>(std::abs(nr) <= limit) &
                          static_cast<unsigned>(std::abs(ni) <= limit) &
                          static_cast<unsigned>(std::abs(nvr) <= limit) &
                          static_cast<unsigned>(std::abs(nvi) <= limit);
      bad |= ok ^ 1u;
    }
  }
  return bad;
}

}  // namespace

// Work units are rows in 2D and column ranges of the single row in 1D; each
// thread writes a disjoint range, so results do not depend on thread count.
template <int Stage>
unsigned Evolver::stage_rows(FieldState& state, const Buffers& in,
                             Buffers& out, double dt, std::size_t unit_begin,
                             std::size_t unit_end, std::vector<double>& lap_re,
                             std::vector<double>& lap_im) {
  const Geometry geo(grid_);
  const StagePointers p{
      Stage == 1 ? state.re.data() : in.re.data(),
      Stage == 1 ? state.im.data() : in.im.data(),
      Stage == 1 ? state.vre.data() : in.vre.data(),
      Stage == 1 ? state.vim.data() : in.vim.data(),
      two_lambda_.data(),
      acc_.re.data(), acc_.im.data(), acc_.vre.data(), acc_.vim.data(),
      state.re.data(), state.im.data(), state.vre.data(), state.vim.data(),
      out.re.data(), out.im.data(), out.vre.data(), out.vim.data()};
  double* lr = lap_re.data();
  double* li = lap_im.data();

  unsigned bad = 0;
  auto process = [&](std::size_t j, std::size_t i0, std::size_t i1) {
    laplacian_row(geo, p.cre, j, i0, i1, lr);
    laplacian_row(geo, p.cim, j, i0, i1, li);
    const std::size_t k = j * geo.nx + i0;
    bad |= update_span<Stage>(
        p.cre + k, p.cim + k, p.cvr + k, p.cvi + k, p.two_lambda + k, lr, li,
        p.ar + k, p.ai + k, p.avr + k, p.avi + k, p.sre + k, p.sim + k,
        p.svr + k, p.svi + k, p.ore + k, p.oim + k, p.ovr + k, p.ovi + k,
        i1 - i0, dt);
  };

  if (grid_.dim == 1) {
    // Blocks keep the Laplacian scratch cache resident.
    constexpr std::size_t kBlock = 1024;
    for (std::size_t b = unit_begin; b < unit_end; b += kBlock) {
      process(0, b, std::min(unit_end, b + kBlock));
    }
  } else {
    for (std::size_t j = unit_begin; j < unit_end; ++j) process(j, 0, grid_.nx);
  }
  return bad;
}

template <int Stage>
unsigned Evolver::stage(FieldState& state, const Buffers& in, Buffers& out,
                      double dt) {
  const std::size_t units = grid_.dim == 1 ? grid_.nx : grid_.ny;
  if (threads_ == 1) {
    return stage_rows<Stage>(state, in, out, dt, 0, units, scratch_re_[0],
                             scratch_im_[0]);
  }
  const unsigned nt = threads_;
  std::vector<unsigned> flags(nt, 0u);
  std::vector<std::thread> pool;
  pool.reserve(nt - 1);
  auto chunk = [&](unsigned t) {
    const std::size_t b = units * t / nt;
    const std::size_t e = units * (t + 1) / nt;
    flags[t] = stage_rows<Stage>(state, in, out, dt, b, e, scratch_re_[t],
                                 scratch_im_[t]);
  };
  for (unsigned t = 1; t < nt; ++t) pool.emplace_back(chunk, t);
  chunk(0);
  for (auto& th : pool) th.join();
  unsigned bad = 0;
  for (unsigned f : flags) bad |= f;
  return bad;
}

void Evolver::step_rk4(FieldState& state, double dt) {
  stage<1>(state, a_, a_, dt);
  stage<2>(state, a_, b_, dt);
  stage<3>(state, b_, a_, dt);
  const unsigned bad = stage<4>(state, a_, a_, dt);
  state.t += dt;
  if (bad != 0) {
    throw BlowupError(state.t, "field evolution diverged at t = " +
                                   std::to_string(state.t) +
                                   " (|value| > 1e6 or non-finite)");
  }
}

void Evolver::step(FieldState& state) {
  step_rk4(state, grid_.dt);
  absorber_.apply(state);
}

void step_rk4(FieldState& state, const LambdaField& lambda, double dt) {
  AbsorberSpec none;
  none.width = 0.0;
  Evolver ev(state.grid, lambda, none, 1);
  ev.step_rk4(state, dt);
}

RunResult run(FieldState& state, Evolver& evolver, const RunOptions& options,
              std::span<const Observer> observers) {
  if (!(options.t_end > 0.0)) {
    throw Error(ErrorKind::Config, "run requires t_end > 0");
  }
  if (!(state.grid == evolver.grid())) {
    throw Error(ErrorKind::Config, "state grid does not match the evolver");
  }
  const double dt = state.grid.dt;
  const std::size_t every = std::max<long long>(
      1, std::llround(options.observe_every / dt));
  const double t0 = state.t;
  const auto total = static_cast<std::size_t>(
      std::max<long long>(0, std::llround((options.t_end - t0) / dt)));

  RunResult result;
  auto notify = [&] {
    bool go = true;
    for (const auto& obs : observers) go = obs(state) && go;
    return go;
  };
  if (!notify()) {
    result.stopped_by_observer = true;
    result.t = state.t;
    return result;
  }
  for (std::size_t n = 1; n <= total; ++n) {
    try {
      evolver.step(state);
    } catch (const BlowupError&) {
      if (!options.blowup_dump.empty()) save_checkpoint(options.blowup_dump, state);
      throw;
    }
    state.t = t0 + static_cast<double>(n) * dt;
    result.steps = n;
    if (n % every == 0 || n == total) {
      if (!notify()) {
        result.stopped_by_observer = true;
        break;
      }
    }
  }
  result.t = state.t;
  return result;
}

template unsigned Evolver::stage<1>(FieldState&, const Buffers&, Buffers&, double);
template unsigned Evolver::stage<2>(FieldState&, const Buffers&, Buffers&, double);
template unsigned Evolver::stage<3>(FieldState&, const Buffers&, Buffers&, double);
template unsigned Evolver::stage<4>(FieldState&, const Buffers&, Buffers&, double);

}  // namespace qball
