#pragma once

// One step of the lagged implicit scheme:
//   1. saturation s_j from a monotone nonlinear problem with h_{j-1}, c^P_{j-1} lagged,
//   2. hydroxide h_j from a linear problem with s_{j-1}, v^R_{j-1} lagged and a
//      one-sided boundary inflow (h_ext - h_j)^+,
//   3. precipitate c^P_j = c^P_{j-1} + tau gamma m_p h_j s_j (1 - s_j),
//   4. flux and velocity rebuilt from (s_j, c^P_j) for the next step.
//
// Space is discretized with piecewise-linear nodal elements and a lumped mass
// matrix. Equations are assembled in "mass x tau" form, i.e. the residual of node i
// is the weak form tested with the hat function of node i, multiplied by tau.

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lime/constitutive.hpp"
#include "lime/mesh.hpp"
#include "lime/transport.hpp"

namespace lime {

struct State {
  double t = 0.0;
  NodalField s;   ///< saturation
  NodalField h;   ///< Ca(OH)2 concentration
  NodalField cP;  ///< deposited CaCO3
  NodalField v;   ///< mollified transport velocity built from (s, cP)

  bool operator==(const State&) const = default;
};

struct SolverConfig {
  std::size_t steps = 1;
  double newton_tol = 1e-12;
  int newton_max_iter = 50;
  double picard_tol = 1e-12;
  int picard_max_iter = 50;
  bool enforce_step_restriction = true;
  /// Floor for s in the hydroxide diffusion coefficient kappa * max(s, floor).
  double degeneracy_floor = 1e-6;

  bool operator==(const SolverConfig&) const = default;
  std::vector<std::string> validate(const std::string& prefix = "solver") const;
};

/// Exterior data of one boundary point, already averaged over the step.
struct BoundaryPointData {
  double alpha = 0.0;  ///< water permeability
  double beta = 0.0;   ///< Ca(OH)2 inflow permeability
  double s_ext = 1.0;
  double h_ext = 0.0;
};

struct BoundaryData {
  BoundaryPointData left;   ///< x = 0
  BoundaryPointData right;  ///< x = L
};

struct TruncationFlags {
  bool hydroxide = false;   ///< Q_R(h_{j-1}) clipped somewhere
  bool dryness = false;     ///< Q_R(1 - s_j) clipped somewhere
  bool velocity = false;    ///< |v_{j-1}| > R somewhere
  bool any() const noexcept { return hydroxide || dryness || velocity; }
};

struct StepReport {
  int newton_iters = 0;
  int saturation_picard_iters = 0;  ///< fallback iterations, 0 when Newton succeeded
  int picard_iters = 0;             ///< active-set sweeps of the hydroxide solve
  double s_residual = 0.0;
  double h_residual = 0.0;
  double s_mass_ledger_residual = 0.0;
  double h_mass_ledger_residual = 0.0;
  TruncationFlags truncation;
};

/// Everything about the discretized problem that does not change between steps.
struct Model {
  Grid1D grid;
  std::vector<double> masses;
  PhysParams params;
  WettingCurve curve;
  PermeabilityLaw law;
  MollifierKernel kernel;
  KernelWeights weights;
};

Model make_model(Grid1D grid, PhysParams params, WettingCurve curve, PermeabilityLaw law,
                 MollifierKernel kernel);

/// Velocity field built from (s, cP) under the model's constitutive laws.
NodalField transport_velocity(const Model& model, std::span<const double> s, std::span<const double> cP);

/// Fills in v for the given (s, h, cP).
State make_state(const Model& model, double t, NodalField s, NodalField h, NodalField cP);

struct RestrictionReport {
  double required_monotone = 0.0;     ///< n must exceed T R^2
  double required_lower_bound = 0.0;  ///< n must exceed 2 T R^2
  double required_contraction = 0.0;  ///< n must exceed T R^2 / (2 s_flat); +inf when s_flat <= 0
  bool degenerate = false;            ///< s_flat <= 0: the contraction bound is unbounded
  bool satisfied = false;             ///< n exceeds all three
  /// The bounds that apply to this implementation: the hydroxide advection is
  /// solved directly, so the contraction bound is waived in the degenerate case.
  bool satisfied_effective = false;

  double required_max() const noexcept;
  std::string describe(std::size_t n) const;
};

RestrictionReport check_step_restrictions(double T, std::size_t n, double R, double s_flat);

struct SaturationSolve {
  NodalField s;
  int newton_iters = 0;
  int picard_iters = 0;
  double residual = 0.0;
  bool dryness_truncated = false;
  bool hydroxide_truncated = false;
};

/// Discrete residual of the saturation equation at candidate s.
NodalField saturation_residual(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                               std::span<const double> s);

/// Solves the saturation equation. Throws SolverError if neither Newton nor
/// the Picard fallback converges, ConfigError if enforcement is on and tau
/// violates the monotonicity bounds.
SaturationSolve solve_saturation_step(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                                      const SolverConfig& cfg);

struct HydroxideSolve {
  NodalField h;
  int iterations = 0;
  double residual = 0.0;
  bool inflow_left = false;
  bool inflow_right = false;
};

/// Discrete residual of the hydroxide equation at candidate h.
NodalField hydroxide_residual(const Model& model, std::span<const double> s_prev, std::span<const double> v_trunc,
                              std::span<const double> h_prev, const BoundaryData& bc, double tau,
                              std::span<const double> h, double degeneracy_floor);

/// Solves the hydroxide equation with coefficients lagged at s_prev and v_trunc.
/// Throws InvariantError if s_prev has negative entries, SolverError if the
/// boundary active set cannot be resolved.
HydroxideSolve solve_hydroxide_step(const Model& model, std::span<const double> s_prev,
                                    std::span<const double> v_trunc, std::span<const double> h_prev,
                                    const BoundaryData& bc, double tau, const SolverConfig& cfg);

NodalField update_precipitate(std::span<const double> cP_prev, std::span<const double> h,
                              std::span<const double> s, double tau, double gamma, double m_p);

/// rho_w sum m (s - s_prev) + tau sum_b alpha (f(s) - f(s_ext)) - tau gamma m_w sum m Q(h_prev) s Q(1 - s)
double saturation_ledger(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                         std::span<const double> s);

/// rho_h sum m (h - h_prev) - tau sum_b beta s_prev (h_ext - h)^+ + tau gamma m_h sum m h s_prev (1 - s_prev)
double hydroxide_ledger(const Model& model, std::span<const double> s_prev, std::span<const double> h_prev,
                        const BoundaryData& bc, double tau, std::span<const double> h);

struct StepOutcome {
  State state;
  StepReport report;
};

StepOutcome advance_one_step(const Model& model, const State& state, const BoundaryData& bc, double tau,
                             const SolverConfig& cfg);

}  // namespace lime
