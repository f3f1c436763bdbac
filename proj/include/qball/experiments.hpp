#pragma once

// Scenario drivers: single runs, sweeps, critical-velocity bisection,
// impact-parameter sweeps and analytic stability curves.

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qball/diagnostics.hpp"
#include "qball/evolve.hpp"
#include "qball/grid.hpp"
#include "qball/model.hpp"
#include "qball/profile1d.hpp"
#include "qball/profile2d.hpp"

namespace qball {

enum class ScenarioKind {
  RestRelease,
  BarrierScatter,
  HoleScatter,
  CriticalVelocitySearch,
  ImpactParameterSweep,
  TwoHoleSymmetric,
  StabilityCurves,
};

std::string to_string(ScenarioKind kind);
ScenarioKind scenario_kind_from_string(std::string_view name);

/// Everything a single evolution needs.
struct RunSpec {
  QBallSpec qball;
  ObstructionSpec obstruction;
  Grid grid = Grid::default_1d();
  AbsorberSpec absorber = AbsorberSpec::default_for(1);
  double t_end = 400.0;
  double observe_every = 0.5;
  unsigned threads = 1;
  /// Stop once the outcome is Transmitted or Reflected.
  bool early_stop = true;
  /// Also stop once the Q-ball has entered a hole and turned back.
  bool stop_when_captured = false;
  TrackerOptions tracker;
  ClassifyOptions classify;
  DeflectionOptions deflection;
  ShootOptions shoot;
  /// Checkpoint written on blowup when non-empty.
  std::string blowup_dump;
};

struct RunRecord {
  RunSpec spec;
  Trajectory trajectory;
  ScatterOutcome outcome;
  std::optional<double> deflection;
  double t_final = 0.0;
  double wall_seconds = 0.0;
  bool failed = false;
  std::string error;
  std::string csv_path;
};

/// Builds the initial state (exact profile in 1D, shot profile in 2D),
/// evolves it and reduces the trajectory. Numerical failures are recorded
/// in the result rather than thrown.
RunRecord simulate(const RunSpec& spec);

/// Scenario description as read from a JSON config. Lists are swept as a
/// Cartesian product; unused fields are ignored by a given kind.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::BarrierScatter;
  std::string name = "scenario";
  int dim = 1;

  std::vector<double> omegas{1.9};
  std::vector<double> velocities{0.1};
  std::vector<double> lambda0s{0.01};
  /// Obstruction centre offsets along y (2D sweeps) or the hole offset for
  /// TwoHoleSymmetric.
  std::vector<double> impacts{0.0};
  /// Lambda values for StabilityCurves.
  std::vector<double> lambdas{1.0};

  double x0 = -20.0;
  double y0 = 0.0;
  /// Interval [lo, hi] in 1D; disk radius and centre x in 2D.
  double region_lo = -10.0;
  double region_hi = 10.0;
  double radius = 5.0;
  double center_x = 0.0;

  Grid grid = Grid::default_1d();
  AbsorberSpec absorber = AbsorberSpec::default_for(1);
  double t_end = 400.0;
  double observe_every = 0.5;
  unsigned threads = 1;
  bool early_stop = true;

  /// Critical velocity search bracket and target width.
  double u_lo = 0.05;
  double u_hi = 0.15;
  double tolerance = 0.002;

  TrackerOptions tracker;
  ClassifyOptions classify;
  DeflectionOptions deflection;
  ShootOptions shoot;

  std::string out_dir;
  bool write_csv = true;
  /// Path the config was read from; recorded in the manifest only.
  std::string source;

  /// Throws Error(Config) on empty lists, non-positive t_end, bad brackets
  /// and parameters outside their domains.
  void validate() const;
};

/// Applies dimension-dependent defaults (grid, absorber, t_end, x0) and then
/// the given JSON object on top. Throws Error(Config) on unknown keys or
/// wrong types.
ScenarioConfig config_from_json(std::string_view text);
std::string config_to_json(const ScenarioConfig& config, int indent = 2);

/// Default configuration for a kind and dimension before any overrides.
ScenarioConfig default_config(ScenarioKind kind, int dim);

ObstructionSpec make_obstruction(const ScenarioConfig& config, double lambda0,
                                 double impact = 0.0);
RunSpec make_run(const ScenarioConfig& config, double omega, double u,
                 double lambda0, double impact = 0.0);

// ---------------------------------------------------------------------------
// Critical velocity

enum class ProbeSide { Low, High };

/// Barriers: Reflected is low and so is an unfinished run whose centroid
/// is moving backwards; everything else is high. Holes: high when
/// Transmitted or when the centroid has left the far edge moving away.
ProbeSide probe_side(const ObstructionSpec& obstruction, const RunRecord& run);

struct CriticalVelocityResult {
  double omega = 0.0;
  double lambda0 = 0.0;
  std::optional<double> u_cr;
  double bracket_width = 0.0;
  double u_lo = 0.0;
  double u_hi = 0.0;
  /// Point-particle prediction sqrt(lambda0 / (1 + lambda0)), barriers only.
  std::optional<double> predicted;
  /// Rest mass, rest energy on top of the barrier (M sqrt(1 + lambda0)) and
  /// the critical speed implied by the two, barriers only.
  std::optional<double> m_rest, e_top, predicted_energy;
  /// Why no critical velocity was produced.
  std::string note;
  std::vector<RunRecord> probes;
};

/// Bisection on u between config.u_lo and config.u_hi. Throws
/// Error(Bracket) when both ends fall on the same side.
CriticalVelocityResult find_critical_velocity(
    const ScenarioConfig& config, double omega, double lambda0,
    const std::function<void(const RunRecord&)>& on_probe = {});

// ---------------------------------------------------------------------------
// Stability

/// E/Q for a Q-ball boosted to u, with E = gamma M and Q the invariant
/// charge.
double energy_per_charge(double omega, double u);

/// Largest |u| with gamma M / Q below 2 sqrt(lambda); nullopt if none.
std::optional<double> stability_velocity_limit(double omega, double lambda);

/// Frequency above which E/Q exceeds 2 sqrt(lambda) at speed u; nullopt when
/// the curve stays below the line on the whole existence range.
std::optional<double> stability_intersection(double u, double lambda);

struct StabilityRow {
  double omega = 0.0;
  double u = 0.0;
  double energy = 0.0;
  double charge = 0.0;
  double e_over_q = 0.0;
  /// Alternative energy with the prefactor formula, for comparison.
  double e_over_q_prefactor = 0.0;
};

struct StabilityReport {
  std::vector<StabilityRow> rows;
  struct Line {
    double lambda = 1.0;
    double mass = 2.0;
    double u = 0.0;
    std::optional<double> intersection;
  };
  std::vector<Line> lines;
};

StabilityReport stability_report(const std::vector<double>& omegas,
                                 const std::vector<double>& velocities,
                                 const std::vector<double>& lambdas);

// ---------------------------------------------------------------------------
// Scenario execution

struct DeflectionEntry {
  double impact = 0.0;
  double omega = 0.0;
  double u = 0.0;
  double lambda0 = 0.0;
  std::optional<double> theta;
  Outcome outcome = Outcome::Undecided;
};

/// Whether theta decreases strictly with impact over entries sharing
/// omega, u and lambda0 that all have an angle.
bool strictly_decreasing(const std::vector<DeflectionEntry>& table);

struct ScenarioReport {
  ScenarioConfig config;
  std::vector<RunRecord> runs;
  std::vector<CriticalVelocityResult> searches;
  std::vector<DeflectionEntry> deflections;
  std::optional<StabilityReport> stability;
  double wall_seconds = 0.0;
  /// Summary as written to summary.json.
  std::string summary_json;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Runs the scenario and, if config.out_dir is set, writes manifest.json
/// first, then one CSV per run and summary.json.
ScenarioReport run_scenario(const ScenarioConfig& config,
                            const ProgressFn& progress = {});

std::vector<DeflectionEntry> deflection_sweep(const ScenarioConfig& config,
                                              std::vector<RunRecord>* runs = nullptr,
                                              const ProgressFn& progress = {});

/// Which way the parent moved relative to the obstruction after release:
/// "repulsive", "attractive" or "neutral" when the net displacement is within
/// the threshold. A lone Q-ball at rest does not move at all, so the dead band
/// only has to absorb centroid jitter.
std::string force_sign(const Trajectory& traj, double threshold = 0.05);

// ---------------------------------------------------------------------------
// Canned reproductions

struct ReproduceTarget {
  std::string name;
  std::string description;
};

std::vector<ReproduceTarget> reproduce_targets();

/// Scenario behind a named target ("table1", "fig3", ...). Throws
/// Error(Config) for unknown names and for "fig14", which is a profile
/// export rather than a scenario.
ScenarioConfig reproduce_config(std::string_view name);

/// Runs a named target into out_dir. `adjust` may edit the config before it
/// runs (grid, thread and t_end overrides). Returns the summary JSON.
std::string run_reproduce(std::string_view name, const std::string& out_dir,
                          const std::function<void(ScenarioConfig&)>& adjust = {},
                          const ProgressFn& progress = {});

/// Same extent, new spacing: node counts are rescaled and dt keeps its ratio
/// to the spacing.
Grid regrid(const Grid& grid, double spacing);

}  // namespace qball
