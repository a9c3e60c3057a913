#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "lime/diagnostics.hpp"
#include "lime/timestep.hpp"

namespace lime {

/// Right-continuous piecewise-constant function of time:
/// values[k] holds on [switch_times[k-1], switch_times[k]).
struct PiecewiseConstant {
  std::vector<double> switch_times;
  std::vector<double> values{0.0};

  static PiecewiseConstant constant(double v) { return {{}, {v}}; }

  double at(double t) const;
  /// Exact mean over [t0, t1]; the value at t0 when t0 == t1.
  double average(double t0, double t1) const;

  bool operator==(const PiecewiseConstant&) const = default;
};

struct BoundaryPoint {
  double alpha = 0.0;
  double beta = 0.0;
  PiecewiseConstant saturation = PiecewiseConstant::constant(1.0);
  PiecewiseConstant concentration = PiecewiseConstant::constant(0.0);
  bool operator==(const BoundaryPoint&) const = default;
};

struct BoundarySchedule {
  BoundaryPoint left;   ///< x = 0
  BoundaryPoint right;  ///< x = L
  bool operator==(const BoundarySchedule&) const = default;
};

/// Exterior data averaged over (t_{j-1}, t_j] with t_j = j tau.
BoundaryData time_averaged_boundary(const BoundarySchedule& schedule, std::size_t j, double tau);

struct GridSpec {
  std::size_t cells = 64;
  double length = 1.0;
  double ratio = 1.05;
  bool operator==(const GridSpec&) const = default;
};

/// A single value means a uniform field; otherwise one value per node.
struct InitialProfile {
  std::vector<double> values{0.0};
  NodalField expand(std::size_t nodes) const;
  bool operator==(const InitialProfile&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  GridSpec grid;
  PhysParams physics;
  WettingCurve wetting;
  PermeabilityLaw permeability;
  MollifierKernel kernel;
  SolverConfig solver;
  BoundarySchedule boundary;
  double final_time = 0.0;
  std::vector<double> snapshot_times;
  InitialProfile initial_saturation;
  InitialProfile initial_concentration;
  /// Stop once ||s_j - s_{j-1}||_inf / tau drops below this after the last
  /// boundary switch. Zero disables the check.
  double equilibrium_tol = 0.0;

  bool operator==(const ScenarioConfig&) const = default;
};

struct ValidationResult {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const noexcept { return errors.empty(); }
};

/// Data-range checks. A zero lower saturation bound is reported as a warning.
ValidationResult validate_scenario(const ScenarioConfig& cfg);

struct FillDryOptions {
  std::size_t cells = 64;
  double grading = 1.05;
  /// 0 picks the smallest multiple of 4 above the step-size bounds.
  std::size_t steps = 0;
};

/// Smallest multiple of 4 strictly above 2 T R^2.
std::size_t default_fill_dry_steps(double T, double R);

/// Fill with lime water through x = 0 until T/4, then dry; x = L drains water
/// against zero exterior saturation and is closed for Ca(OH)2.
ScenarioConfig build_fill_dry_scenario(double T, const FillDryOptions& options = {});

/// Constant saturation matching the exterior, no Ca(OH)2, no reaction.
ScenarioConfig build_stationary_scenario(double T = 1.0, std::size_t cells = 16, std::size_t steps = 256);

inline constexpr double kDryingSaturationFloor = 0.01;

struct Snapshot {
  double time = 0.0;
  std::size_t step = 0;
  NodalField x, s, h, cP, v;
  bool operator==(const Snapshot&) const = default;
};

Snapshot make_snapshot(const Grid1D& grid, const State& state, std::size_t step);

struct RunTotals {
  std::size_t steps_completed = 0;
  std::size_t newton_iters = 0;
  std::size_t saturation_picard_iters = 0;
  std::size_t picard_iters = 0;
  std::size_t newton_fallbacks = 0;
  double max_s_residual = 0.0;
  double max_h_residual = 0.0;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  Trajectory trajectory;
  InvariantReport invariants;
  RunTotals totals;
  RestrictionReport restrictions;
  std::vector<std::string> warnings;
  State final_state;
  double tau = 0.0;
  bool stopped_at_equilibrium = false;
  std::optional<std::string> failure;  ///< set when a step failed; results are partial

  bool ok() const noexcept { return !failure && invariants.all_passed(); }
};

Model build_model(const ScenarioConfig& cfg);
State initial_state(const ScenarioConfig& cfg, const Model& model);

/// Throws ConfigError on an invalid configuration (or a violated step bound
/// when enforcement is on). Step failures are reported in RunResult::failure.
RunResult run_scenario(const ScenarioConfig& cfg);

struct ConvergenceStudy {
  std::vector<std::size_t> steps;
  std::vector<double> s_differences;  ///< ||s_k - s_{k+1}||_inf at final time
  std::vector<double> h_differences;
  std::vector<double> s_orders;       ///< log2 of successive difference ratios
  std::vector<double> h_orders;
};

/// Runs the scenario with steps n, 2n, 4n, ... (levels runs) and compares final states.
ConvergenceStudy run_convergence_study(const ScenarioConfig& cfg, std::size_t levels);

}  // namespace lime
