#pragma once

// Real-time evolution of Phi_tt = lap Phi - 2 lambda Phi (2 - 4|Phi|^2 + 3|Phi|^4)
// by classical RK4 with a second-order central Laplacian and a sponge layer
// at the domain edges.

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qball/grid.hpp"

namespace qball {

/// Sponge layer: sigma(d) = sigma_max (d / width)^2 where d is the depth into
/// the layer. After every step Phi_dot *= 1 - sigma dt and
/// Phi *= 1 - field_damping sigma dt.
struct AbsorberSpec {
  double width = 5.0;
  double sigma_max = 5.0;
  double field_damping = 1.0;

  static AbsorberSpec default_for(int dim);
};

class Absorber {
 public:
  Absorber() = default;
  Absorber(const Grid& grid, const AbsorberSpec& spec);

  void apply(FieldState& state) const;

  /// Damping rate at a node; zero outside the layer.
  double sigma(std::size_t k) const;
  bool in_layer(std::size_t k) const { return sigma(k) > 0.0; }

  const AbsorberSpec& spec() const noexcept { return spec_; }

 private:
  AbsorberSpec spec_;
  double dt_ = 0.0;
  std::vector<std::size_t> nodes_;  // ascending
  std::vector<double> sigma_;       // parallel to nodes_
};

void apply_absorber(FieldState& state, const Absorber& absorber);

/// (Phi_dot, Phi_ddot) packed into a FieldState: re/im hold Phi_dot and
/// vre/vim hold Phi_ddot. Grid edges use a mirror ghost node.
FieldState rhs(const FieldState& state, const LambdaField& lambda);

/// One RK4 step of size state.grid.dt with the sponge applied afterwards.
class Evolver {
 public:
  Evolver(const Grid& grid, LambdaField lambda,
          AbsorberSpec absorber = AbsorberSpec::default_for(1),
          unsigned threads = 1);

  /// Throws BlowupError when a value exceeds kBlowupLimit or is not finite.
  void step(FieldState& state);

  /// RK4 only, no absorber; dt taken from the argument.
  void step_rk4(FieldState& state, double dt);

  const Grid& grid() const noexcept { return grid_; }
  const LambdaField& lambda() const noexcept { return lambda_; }
  const Absorber& absorber() const noexcept { return absorber_; }

  static constexpr double kBlowupLimit = 1e6;

 private:
  struct Buffers {
    std::vector<double> re, im, vre, vim;
  };

  template <int Stage>
  unsigned stage(FieldState& state, const Buffers& in, Buffers& out,
               double dt);
  template <int Stage>
  unsigned stage_rows(FieldState& state, const Buffers& in, Buffers& out,
                    double dt, std::size_t row_begin, std::size_t row_end,
                    std::vector<double>& lap_re, std::vector<double>& lap_im);

  Grid grid_;
  LambdaField lambda_;
  std::vector<double> two_lambda_;
  Absorber absorber_;
  unsigned threads_;
  Buffers a_, b_, acc_;
  std::vector<std::vector<double>> scratch_re_, scratch_im_;
};

/// Single RK4 step without absorber.
void step_rk4(FieldState& state, const LambdaField& lambda, double dt);

/// Receives a read-only view of the state at the observer cadence; returning
/// false stops the run.
using Observer = std::function<bool(const FieldState&)>;

struct RunOptions {
  double t_end = 0.0;
  double observe_every = 0.5;
  /// When set, the state is written there as a checkpoint before a blowup
  /// is rethrown.
  std::string blowup_dump;
};

struct RunResult {
  double t = 0.0;
  std::size_t steps = 0;
  bool stopped_by_observer = false;
};

/// Steps `state` until t_end. Observers are invoked at t = 0 and then every
/// observe_every time units.
RunResult run(FieldState& state, Evolver& evolver, const RunOptions& options,
              std::span<const Observer> observers);

// Checkpoint file, little-endian throughout:
//   offset  size  field
//   0       8     magic "QBCKPT01"
//   8       4     uint32 dimension (1 or 2)
//   12      4     uint32 reserved (0)
//   16      8     uint64 nx
//   24      8     uint64 ny
//   32      8     float64 dx
//   40      8     float64 dy
//   48      8     float64 dt
//   56      8     float64 t
//   64      8     float64 x of node 0
//   72      8     float64 y of node 0
//   80      ...   float64 arrays Re Phi, Im Phi, Re Phi_dot, Im Phi_dot,
//                 each nx*ny values in row-major (x fastest) order
void save_checkpoint(const std::string& path, const FieldState& state);
FieldState load_checkpoint(const std::string& path);

}  // namespace qball
