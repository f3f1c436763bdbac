#pragma once

// Observables of a field snapshot and the reduction of a run to a trajectory
// and a scattering outcome.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qball/grid.hpp"
#include "qball/model.hpp"
#include "qball/profile1d.hpp"

namespace qball {

/// j0 = Im(conj(Phi) Phi_dot).
std::vector<double> charge_density(const FieldState& state);

/// |Phi_dot|^2 / 2 + |grad Phi|^2 / 2 + lambda U(|Phi|), central differences
/// with mirror ghosts at the grid edges.
std::vector<double> energy_density(const FieldState& state,
                                   const LambdaField& lambda);

/// Momentum density -Re(conj(Phi_dot) d_x Phi) (and the y component in 2D).
/// Positive for a Q-ball moving towards +x.
std::vector<double> momentum_density(const FieldState& state, int axis = 0);

double total_charge(const FieldState& state);
double total_energy(const FieldState& state, const LambdaField& lambda);
Point2 total_momentum(const FieldState& state);

/// Per-node selection; an empty mask selects the whole grid.
using Mask = std::vector<unsigned char>;

Mask region_mask(const Grid& grid, const ObstructionSpec& obstruction);
Mask complement(const Mask& mask, std::size_t size);

struct Blob {
  std::size_t cells = 0;
  double charge = 0.0;  // sum of |j0| dV over the blob
  Point2 centroid;
};

/// Connected components (1D neighbours, 2D 4-neighbours) of
/// {|j0| > threshold_frac * max |j0|} restricted to the mask. Components with
/// fewer than min_cells nodes are dropped. Sorted by decreasing charge.
std::vector<Blob> find_blobs(const Grid& grid, const std::vector<double>& j0,
                             const Mask& mask, double threshold_frac,
                             std::size_t min_cells = 3);

std::size_t count_blobs(const FieldState& state, const Mask& mask = {},
                        double threshold_frac = 0.01,
                        std::size_t min_cells = 3);

/// |j0|-weighted mean position over nodes above threshold_frac of the masked
/// maximum. nullopt when the masked |j0| total is below `floor`.
std::optional<Point2> centroid(const FieldState& state, const Mask& mask = {},
                               double threshold_frac = 0.01,
                               double floor = 1e-6);

struct TrajectorySample {
  double t = 0.0;
  Point2 position;
  Point2 velocity;
  double charge = 0.0;
  double energy = 0.0;
  Point2 momentum;
  std::size_t blobs = 0;
  /// Charge of the tracked (largest) component and inside the obstruction.
  double parent_charge = 0.0;
  double region_charge = 0.0;
  bool present = true;
};

struct Trajectory {
  QBallSpec qball;
  ObstructionSpec obstruction;
  Grid grid;
  std::vector<TrajectorySample> samples;

  bool empty() const noexcept { return samples.empty(); }
  const TrajectorySample& back() const { return samples.back(); }
};

struct TrackerOptions {
  /// Support threshold for the tracked component, relative to max |j0|.
  double centroid_threshold = 0.01;
  double blob_threshold = 0.01;
  std::size_t blob_min_cells = 3;
  /// Trailing window of the least-squares velocity fit.
  std::size_t velocity_window = 10;
  bool energy = true;
};

/// Appends one sample per call. The position is the centroid of the
/// connected component carrying the most charge, so that after fission the
/// parent is followed and offspring are ignored.
class TrajectoryRecorder {
 public:
  TrajectoryRecorder(const QBallSpec& qball, const ObstructionSpec& obstruction,
                     const LambdaField& lambda, TrackerOptions options = {});

  void record(const FieldState& state);

  const Trajectory& trajectory() const noexcept { return traj_; }
  Trajectory take() { return std::move(traj_); }

 private:
  const LambdaField* lambda_;
  TrackerOptions opt_;
  Trajectory traj_;
  Mask region_;
};

/// Least-squares slope of position against time over the last `window`
/// present samples up to and including index `last`.
Point2 fit_velocity(const std::vector<TrajectorySample>& samples,
                    std::size_t last, std::size_t window);

enum class Outcome { Transmitted, Reflected, Trapped, Undecided };

std::string to_string(Outcome outcome);

struct ScatterOutcome {
  Outcome outcome = Outcome::Undecided;
  /// Number of fragments when fission persisted, otherwise 0.
  std::size_t fission = 0;
  Point2 final_position;
  double final_speed = 0.0;
  /// Q of the tracked component and inside the obstruction, as fractions of
  /// the initial total charge.
  double parent_fraction = 0.0;
  double region_fraction = 0.0;

  bool fissioned() const noexcept { return fission > 1; }
};

struct ClassifyOptions {
  /// Distance past the obstruction edge that counts as having left it.
  double margin = 5.0;
  /// Samples of blobs > 1 needed to call it fission.
  std::size_t persistence = 10;
};

/// Transmitted: beyond the far x edge by more than margin and moving away.
/// Reflected: before the near edge by more than margin and moving back.
/// Trapped: centroid inside the obstruction's x extent at the last sample.
/// Anything else is Undecided. The motion is taken to be along +x.
ScatterOutcome classify(const Trajectory& traj,
                        const ClassifyOptions& options = {});

/// True once classify would return Transmitted or Reflected.
bool outcome_decided(const Trajectory& traj, const ClassifyOptions& options = {});

/// True when the tracked Q-ball has been inside the obstruction's x extent
/// and now moves towards -x faster than min_speed. The threshold keeps a
/// slowly crawling escape from being mistaken for a turn-around.
bool captured(const Trajectory& traj, double min_speed = 0.01);

/// Median blob count over the last `window` samples.
std::size_t late_blob_count(const Trajectory& traj, std::size_t window = 20);

struct DeflectionOptions {
  /// Free flight starts once the centroid is this far from the nearest
  /// obstruction centre, after the first closest approach. Default: radius + 5.
  std::optional<double> free_radius;
  /// The free-flight segment ends once the centroid is this close to the grid edge.
  double edge_margin = 3.0;
  std::size_t min_samples = 4;
};

/// Outgoing direction atan2(u_y, u_x) in degrees from a least-squares fit
/// over the free-flight segment. That segment ends at the edge band or at the
/// first sample that is closer to the obstruction than its predecessor.
/// Angles within 0.5 degrees of a full turn are reported as 180. nullopt when
/// there is no free-flight segment.
std::optional<double> deflection_angle(const Trajectory& traj,
                                       const DeflectionOptions& options = {});

/// Header then `t,x[,y],ux[,uy],Q,E,Px[,Py],blobs`, 12 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

/// `<scenario>_<omega>_<u>_<lambda0>.csv`
std::string trajectory_file_name(const std::string& scenario, double omega,
                                 double u, double lambda0);

}  // namespace qball
