#pragma once

// Runtime invariant monitors and offline verification helpers.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "lime/timestep.hpp"

namespace lime {

inline constexpr double kStateBoundTolerance = 1e-10;

struct Violation {
  std::string check;
  std::size_t step = 0;
  std::size_t node = 0;
  double magnitude = 0.0;
  bool operator==(const Violation&) const = default;
};

/// Bounds check of one state. Margins are signed: positive means inside the bound.
struct StateBoundsCheck {
  bool ok = true;
  double saturation_margin = 0.0;  ///< min over nodes of min(s - s_flat, 1 - s)
  double hydroxide_margin = 0.0;   ///< min over nodes of h
  std::vector<Violation> violations;
};

StateBoundsCheck check_state_bounds(const State& state, const PhysParams& params, std::size_t step = 0,
                                    double tol = kStateBoundTolerance);

/// Aggregate of every monitor over a run.
struct InvariantReport {
  std::size_t steps_checked = 0;

  bool saturation_bounds_ok = true;
  double worst_saturation_margin = 0.0;
  bool hydroxide_positive_ok = true;
  double worst_hydroxide_margin = 0.0;
  bool precipitate_monotone_ok = true;
  double min_precipitate_increment = 0.0;

  bool ledger_ok = true;
  double ledger_tolerance = 0.0;
  double max_saturation_ledger = 0.0;
  double max_hydroxide_ledger = 0.0;

  bool truncation_inactive = true;
  std::size_t truncation_events = 0;

  bool velocity_bound_ok = true;
  double velocity_bound_constant = 0.0;
  double max_velocity_bound_ratio = 0.0;  ///< max of sup|v| / (C (1 + ||grad s||))

  bool hydroxide_ceiling_ok = true;       ///< h <= 10 h_sharp throughout
  double max_hydroxide = 0.0;

  std::vector<Violation> violations;

  bool all_passed() const noexcept {
    return saturation_bounds_ok && hydroxide_positive_ok && precipitate_monotone_ok && ledger_ok &&
           truncation_inactive && velocity_bound_ok && hydroxide_ceiling_ok;
  }
  bool operator==(const InvariantReport&) const = default;
};

/// Per-step scalars recorded along a run. Step 0 is the initial state.
struct StepSummary {
  std::size_t step = 0;
  double t = 0.0;
  double hydroxide_mass = 0.0;   ///< sum m_i h_i
  double gradient_sq = 0.0;      ///< ||grad s||_2^2
  double sup_velocity = 0.0;
  double max_hydroxide = 0.0;
  double max_saturation_change = 0.0;  ///< ||s_j - s_{j-1}||_inf
};

struct Trajectory {
  double tau = 0.0;
  std::vector<StepSummary> steps;
};

StepSummary summarize_state(const Model& model, const State& state, std::size_t step,
                            const State* previous = nullptr);

/// Collects per-step checks into an InvariantReport.
class InvariantMonitor {
 public:
  InvariantMonitor(const Model& model, double solver_tolerance, std::size_t max_violations = 64);

  void observe_initial(const State& state);
  void observe_step(std::size_t step, const State& previous, const State& next, const StepReport& report);

  const InvariantReport& report() const noexcept { return report_; }

 private:
  void record(Violation v);

  const Model& model_;
  std::size_t max_violations_;
  InvariantReport report_;
};

/// Largest total hydroxide sum m_i h_i along the trajectory.
double hydroxide_mass_bound(const Trajectory& trajectory);

/// Ceiling the mass may not exceed: initial mass + T * sum_b beta_b h_sharp / rho_h.
double hydroxide_mass_ceiling(double initial_mass, double T, double beta_total, double h_sharp, double rho_h);

/// Partial sums tau * sum_{j<=J} ||grad s_j||^2 for J = 1..n.
std::vector<double> gradient_energy_series(const Trajectory& trajectory);

// ---------------------------------------------------------------------------
// Brute-force reference solvers for grids of at most four nodes. They share the
// constitutive laws with production code but nothing of the assembly or the
// solution algorithms.

struct SmallCase {
  Model model;
  State prev;
  BoundaryData bc;
  double tau = 0.0;
  SolverConfig solver;
};

/// Fixed-point iteration with dense solves, stopping on increments below 1e-14.
std::optional<NodalField> oracle_saturation(const SmallCase& c);
/// Enumerates the boundary inflow configurations and solves each densely.
std::optional<NodalField> oracle_hydroxide(const SmallCase& c, std::span<const double> v_trunc);

struct OracleComparison {
  bool conclusive = false;
  double saturation_deviation = 0.0;
  double hydroxide_deviation = 0.0;
  std::string note;

  double max_deviation() const noexcept { return std::max(saturation_deviation, hydroxide_deviation); }
};

OracleComparison oracle_compare_small(const SmallCase& c);

/// Admissible tiny problem drawn from rng: 2 to 4 nodes, random laws and data,
/// time step inside the restriction bounds.
SmallCase random_small_case(std::mt19937_64& rng);

struct OracleSuiteResult {
  std::size_t cases = 0;
  std::size_t conclusive = 0;
  double max_deviation = 0.0;
  std::size_t worst_case = 0;
};

OracleSuiteResult run_oracle_suite(std::uint64_t seed, std::size_t cases);

}  // namespace lime
