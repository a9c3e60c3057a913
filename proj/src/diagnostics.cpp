#include "lime/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace lime {

StateBoundsCheck check_state_bounds(const State& state, const PhysParams& params, std::size_t step, double tol) {
  StateBoundsCheck out;
  out.saturation_margin = INFINITY;
  out.hydroxide_margin = INFINITY;
  for (std::size_t i = 0; i < state.s.size(); ++i) {
    const double margin = std::min(state.s[i] - params.s_flat, 1.0 - state.s[i]);
    out.saturation_margin = std::min(out.saturation_margin, margin);
    if (!(margin >= -tol)) out.violations.push_back({"saturation_bounds", step, i, -margin});
  }
  for (std::size_t i = 0; i < state.h.size(); ++i) {
    out.hydroxide_margin = std::min(out.hydroxide_margin, state.h[i]);
    if (!(state.h[i] >= -tol)) out.violations.push_back({"hydroxide_positivity", step, i, -state.h[i]});
  }
  out.ok = out.violations.empty();
  return out;
}

StepSummary summarize_state(const Model& model, const State& state, std::size_t step, const State* previous) {
  StepSummary s;
  s.step = step;
  s.t = state.t;
  for (std::size_t i = 0; i < state.h.size(); ++i) {
    s.hydroxide_mass += model.masses[i] * state.h[i];
    s.max_hydroxide = std::max(s.max_hydroxide, state.h[i]);
  }
  s.gradient_sq = gradient_norm_sq(state.s, model.grid);
  for (double v : state.v) s.sup_velocity = std::max(s.sup_velocity, std::abs(v));
  if (previous != nullptr) {
    for (std::size_t i = 0; i < state.s.size(); ++i) {
      s.max_saturation_change = std::max(s.max_saturation_change, std::abs(state.s[i] - previous->s[i]));
    }
  }
  return s;
}

InvariantMonitor::InvariantMonitor(const Model& model, double solver_tolerance, std::size_t max_violations)
    : model_(model), max_violations_(max_violations) {
  report_.ledger_tolerance = solver_tolerance * static_cast<double>(model.grid.node_count());
  report_.velocity_bound_constant = velocity_bound_constant(model.kernel, model.law, model.curve,
                                                            model.params.rho_h, model.grid.length());
}

void InvariantMonitor::record(Violation v) {
  if (report_.violations.size() < max_violations_) report_.violations.push_back(std::move(v));
}

void InvariantMonitor::observe_initial(const State& state) {
  const auto bounds = check_state_bounds(state, model_.params, 0);
  report_.worst_saturation_margin = bounds.saturation_margin;
  report_.worst_hydroxide_margin = bounds.hydroxide_margin;
  for (const auto& v : bounds.violations) {
    if (v.check == "saturation_bounds") report_.saturation_bounds_ok = false;
    if (v.check == "hydroxide_positivity") report_.hydroxide_positive_ok = false;
    record(v);
  }
  for (double h : state.h) report_.max_hydroxide = std::max(report_.max_hydroxide, h);
}

void InvariantMonitor::observe_step(std::size_t step, const State& previous, const State& next,
                                    const StepReport& step_report) {
  const bool first = report_.steps_checked == 0;
  ++report_.steps_checked;

  const auto bounds = check_state_bounds(next, model_.params, step);
  report_.worst_saturation_margin = std::min(report_.worst_saturation_margin, bounds.saturation_margin);
  report_.worst_hydroxide_margin = std::min(report_.worst_hydroxide_margin, bounds.hydroxide_margin);
  for (const auto& v : bounds.violations) {
    if (v.check == "saturation_bounds") report_.saturation_bounds_ok = false;
    if (v.check == "hydroxide_positivity") report_.hydroxide_positive_ok = false;
    record(v);
  }

  double min_increment = INFINITY;
  for (std::size_t i = 0; i < next.cP.size(); ++i) {
    const double inc = next.cP[i] - previous.cP[i];
    min_increment = std::min(min_increment, inc);
    if (inc < 0.0) {
      report_.precipitate_monotone_ok = false;
      record({"precipitate_monotone", step, i, -inc});
    }
  }
  report_.min_precipitate_increment =
      first ? min_increment : std::min(report_.min_precipitate_increment, min_increment);

  const double s_ledger = std::abs(step_report.s_mass_ledger_residual);
  const double h_ledger = std::abs(step_report.h_mass_ledger_residual);
  report_.max_saturation_ledger = std::max(report_.max_saturation_ledger, s_ledger);
  report_.max_hydroxide_ledger = std::max(report_.max_hydroxide_ledger, h_ledger);
  if (!(s_ledger <= report_.ledger_tolerance)) {
    report_.ledger_ok = false;
    record({"saturation_ledger", step, 0, s_ledger});
  }
  if (!(h_ledger <= report_.ledger_tolerance)) {
    report_.ledger_ok = false;
    record({"hydroxide_ledger", step, 0, h_ledger});
  }

  if (step_report.truncation.any()) {
    report_.truncation_inactive = false;
    ++report_.truncation_events;
    record({"truncation_active", step, 0, 1.0});
  }

  double sup_v = 0.0;
  std::size_t arg_v = 0;
  for (std::size_t i = 0; i < next.v.size(); ++i) {
    if (std::abs(next.v[i]) > sup_v) {
      sup_v = std::abs(next.v[i]);
      arg_v = i;
    }
  }
  const double bound =
      report_.velocity_bound_constant * (1.0 + std::sqrt(gradient_norm_sq(next.s, model_.grid)));
  const double ratio = bound > 0.0 ? sup_v / bound : (sup_v > 0.0 ? INFINITY : 0.0);
  report_.max_velocity_bound_ratio = std::max(report_.max_velocity_bound_ratio, ratio);
  if (!(sup_v <= bound * (1.0 + 1e-12))) {
    report_.velocity_bound_ok = false;
    record({"velocity_bound", step, arg_v, sup_v - bound});
  }

  const double ceiling = 10.0 * model_.params.h_sharp;
  for (std::size_t i = 0; i < next.h.size(); ++i) {
    report_.max_hydroxide = std::max(report_.max_hydroxide, next.h[i]);
    if (next.h[i] > ceiling) {
      report_.hydroxide_ceiling_ok = false;
      record({"hydroxide_ceiling", step, i, next.h[i] - ceiling});
    }
  }
}

double hydroxide_mass_bound(const Trajectory& trajectory) {
  double m = 0.0;
  for (const auto& s : trajectory.steps) m = std::max(m, s.hydroxide_mass);
  return m;
}

double hydroxide_mass_ceiling(double initial_mass, double T, double beta_total, double h_sharp, double rho_h) {
  return initial_mass + T * beta_total * h_sharp / rho_h;
}

std::vector<double> gradient_energy_series(const Trajectory& trajectory) {
  std::vector<double> out;
  double acc = 0.0;
  for (const auto& s : trajectory.steps) {
    if (s.step == 0) continue;
    acc += trajectory.tau * s.gradient_sq;
    out.push_back(acc);
  }
  return out;
}

}  // namespace lime
