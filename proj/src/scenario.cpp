#include "lime/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "lime/error.hpp"
#include "lime/format.hpp"

namespace lime {

double PiecewiseConstant::at(double t) const {
  const auto k = static_cast<std::size_t>(
      std::upper_bound(switch_times.begin(), switch_times.end(), t) - switch_times.begin());
  return values[k];
}

double PiecewiseConstant::average(double t0, double t1) const {
  if (!(t1 > t0)) return at(t0);
  double acc = 0.0;
  double left = t0;
  auto k = static_cast<std::size_t>(
      std::upper_bound(switch_times.begin(), switch_times.end(), t0) - switch_times.begin());
  while (k < switch_times.size() && switch_times[k] < t1) {
    acc += values[k] * (switch_times[k] - left);
    left = switch_times[k];
    ++k;
  }
  acc += values[k] * (t1 - left);
  return acc / (t1 - t0);
}

BoundaryData time_averaged_boundary(const BoundarySchedule& schedule, std::size_t j, double tau) {
  const double t0 = static_cast<double>(j - 1) * tau;
  const double t1 = static_cast<double>(j) * tau;
  auto point = [&](const BoundaryPoint& p) {
    return BoundaryPointData{p.alpha, p.beta, p.saturation.average(t0, t1), p.concentration.average(t0, t1)};
  };
  return {point(schedule.left), point(schedule.right)};
}

NodalField InitialProfile::expand(std::size_t nodes) const {
  if (values.size() == 1) return NodalField(nodes, values.front());
  return values;
}

namespace {

void check_schedule(const PiecewiseConstant& f, const std::string& path, double lo, double hi, const char* range,
                    std::vector<std::string>& errors) {
  if (f.values.size() != f.switch_times.size() + 1) {
    errors.push_back(path + ": needs exactly one more value than switch times");
    return;
  }
  for (std::size_t k = 0; k + 1 < f.switch_times.size(); ++k) {
    if (!(f.switch_times[k + 1] > f.switch_times[k])) {
      errors.push_back(path + ".times: switch times must be strictly increasing");
      break;
    }
  }
  for (double v : f.values) {
    if (!(v >= lo && v <= hi)) {
      errors.push_back(path + ".values: " + format_shortest(v) + " outside " + range);
      break;
    }
  }
}

void check_profile(const InitialProfile& p, std::size_t nodes, const std::string& path, double lo, double hi,
                   const char* range, std::vector<std::string>& errors) {
  if (p.values.size() != 1 && p.values.size() != nodes) {
    errors.push_back(path + ": expected a single value or " + std::to_string(nodes) + " nodal values");
    return;
  }
  for (double v : p.values) {
    if (!(v >= lo && v <= hi)) {
      errors.push_back(path + ": " + format_shortest(v) + " outside " + range);
      break;
    }
  }
}

double last_switch_time(const BoundarySchedule& b) {
  double t = 0.0;
  for (const auto* p : {&b.left, &b.right}) {
    for (const auto* f : {&p->saturation, &p->concentration}) {
      if (!f->switch_times.empty()) t = std::max(t, f->switch_times.back());
    }
  }
  return t;
}

}  // namespace

ValidationResult validate_scenario(const ScenarioConfig& cfg) {
  ValidationResult r;
  auto& e = r.errors;
  const auto& p = cfg.physics;
  auto append = [&](std::vector<std::string> more) { e.insert(e.end(), more.begin(), more.end()); };
  append(p.validate("physics"));
  append(cfg.solver.validate("solver"));
  if (cfg.grid.cells < 1) e.push_back("grid.cells: at least one cell required");
  if (!(cfg.grid.length > 0.0) || !std::isfinite(cfg.grid.length)) e.push_back("grid.length: must be positive");
  if (!(cfg.grid.ratio > 0.0) || !std::isfinite(cfg.grid.ratio)) e.push_back("grid.ratio: must be positive");
  if (!(cfg.final_time >= 0.0) || !std::isfinite(cfg.final_time)) e.push_back("time.final: must be nonnegative");
  for (double t : cfg.snapshot_times) {
    if (!(t >= 0.0 && t <= cfg.final_time)) {
      e.push_back("time.snapshots: " + format_shortest(t) + " outside [0, time.final]");
      break;
    }
  }
  if (!(cfg.equilibrium_tol >= 0.0)) e.push_back("time.equilibrium_tol: must be nonnegative");

  const char* s_range = "[s_flat, 1]";
  const char* h_range = "[0, h_sharp]";
  const std::pair<const BoundaryPoint*, std::string> points[] = {{&cfg.boundary.left, "boundary.left"},
                                                                 {&cfg.boundary.right, "boundary.right"}};
  for (const auto& [bp, path] : points) {
    if (!(bp->alpha >= 0.0) || !std::isfinite(bp->alpha)) {
      e.push_back(path + ".alpha: boundary water permeability must be nonnegative");
    }
    if (!(bp->beta >= 0.0) || !std::isfinite(bp->beta)) {
      e.push_back(path + ".beta: boundary Ca(OH)2 permeability must be nonnegative");
    }
    check_schedule(bp->saturation, path + ".saturation", p.s_flat, 1.0, s_range, e);
    check_schedule(bp->concentration, path + ".concentration", 0.0, p.h_sharp, h_range, e);
  }
  if (!(cfg.boundary.left.alpha + cfg.boundary.right.alpha > 0.0)) {
    e.push_back("boundary.alpha: at least one boundary point must be permeable to water");
  }
  if (!(cfg.boundary.left.beta + cfg.boundary.right.beta > 0.0)) {
    e.push_back("boundary.beta: at least one boundary point must admit Ca(OH)2 inflow");
  }
  const std::size_t nodes = cfg.grid.cells + 1;
  check_profile(cfg.initial_saturation, nodes, "initial.saturation", p.s_flat, 1.0, s_range, e);
  check_profile(cfg.initial_concentration, nodes, "initial.concentration", 0.0, p.h_sharp, h_range, e);

  if (p.s_flat == 0.0) {
    r.warnings.push_back("physics.s_flat: lower saturation bound is 0 (degenerate); the Ca(OH)2 diffusion "
                         "coefficient uses max(s, " + format_shortest(cfg.solver.degeneracy_floor) + ")");
  }
  if (r.ok() && cfg.final_time > 0.0) {
    const auto rr = check_step_restrictions(cfg.final_time, cfg.solver.steps, p.truncation, p.s_flat);
    if (!rr.satisfied_effective) {
      const std::string msg = "solver.steps: " + std::to_string(cfg.solver.steps) +
                              " steps violate the step-size bound n > " + format_shortest(rr.required_max());
      if (cfg.solver.enforce_step_restriction) {
        e.push_back(msg);
      } else {
        r.warnings.push_back(msg + " (not enforced)");
      }
    } else if (rr.degenerate) {
      r.warnings.push_back("solver.steps: hydroxide contraction bound unbounded for s_flat = 0; waived");
    }
  }
  return r;
}

std::size_t default_fill_dry_steps(double T, double R) {
  const auto bound = static_cast<std::size_t>(std::floor(2.0 * T * R * R)) + 1;
  return std::max<std::size_t>(4, (bound + 3) / 4 * 4);
}

ScenarioConfig build_fill_dry_scenario(double T, const FillDryOptions& options) {
  ScenarioConfig cfg;
  cfg.name = "fill_dry_default";
  cfg.grid = {options.cells, 1.0, options.grading};
  cfg.physics = PhysParams{};
  cfg.physics.truncation = default_truncation_level(cfg.physics.h_sharp);
  cfg.wetting = WettingCurve::linear(0.0, 1.0);
  cfg.permeability = PermeabilityLaw::constant(2e-4);
  cfg.kernel = MollifierKernel(KernelProfile::Triangular, 0.05 * cfg.grid.length);
  cfg.solver.steps = options.steps > 0 ? options.steps : default_fill_dry_steps(T, cfg.physics.truncation);

  const double fill_end = T / 4.0;
  const double s_dry = std::max(cfg.physics.s_flat, kDryingSaturationFloor);
  cfg.boundary.left = {1.0, 1.0, {{fill_end}, {1.0, s_dry}}, {{fill_end}, {1.0, 0.0}}};
  cfg.boundary.right = {1.0, 0.0, PiecewiseConstant::constant(0.0), PiecewiseConstant::constant(0.0)};

  cfg.final_time = T;
  cfg.snapshot_times = {T / 4.0, T / 2.0, 3.0 * T / 4.0, T};
  cfg.initial_saturation = {{cfg.physics.s_flat}};
  cfg.initial_concentration = {{0.0}};
  return cfg;
}

ScenarioConfig build_stationary_scenario(double T, std::size_t cells, std::size_t steps) {
  ScenarioConfig cfg;
  cfg.name = "stationary";
  cfg.grid = {cells, 1.0, 1.0};
  cfg.physics = PhysParams{};
  cfg.physics.gamma = 0.0;
  cfg.physics.s_flat = 0.5;
  cfg.physics.truncation = default_truncation_level(cfg.physics.h_sharp);
  cfg.wetting = WettingCurve::linear(0.0, 1.0);
  cfg.permeability = PermeabilityLaw::constant(2e-4);
  cfg.kernel = MollifierKernel(KernelProfile::Triangular, 0.05);
  cfg.solver.steps = steps;
  cfg.boundary.left = {1.0, 1.0, PiecewiseConstant::constant(0.6), PiecewiseConstant::constant(0.0)};
  cfg.boundary.right = {1.0, 0.0, PiecewiseConstant::constant(0.6), PiecewiseConstant::constant(0.0)};
  cfg.final_time = T;
  cfg.snapshot_times = {T / 4.0, T / 2.0, 3.0 * T / 4.0, T};
  cfg.initial_saturation = {{0.6}};
  cfg.initial_concentration = {{0.0}};
  return cfg;
}

Snapshot make_snapshot(const Grid1D& grid, const State& state, std::size_t step) {
  const auto x = grid.nodes();
  return Snapshot{state.t, step, NodalField(x.begin(), x.end()), state.s, state.h, state.cP, state.v};
}

Model build_model(const ScenarioConfig& cfg) {
  return make_model(build_graded_grid(cfg.grid.cells, cfg.grid.length, cfg.grid.ratio), cfg.physics, cfg.wetting,
                    cfg.permeability, cfg.kernel);
}

State initial_state(const ScenarioConfig& cfg, const Model& model) {
  const std::size_t n = model.grid.node_count();
  return make_state(model, 0.0, cfg.initial_saturation.expand(n), cfg.initial_concentration.expand(n),
                    NodalField(n, 0.0));
}

RunResult run_scenario(const ScenarioConfig& cfg) {
  auto validation = validate_scenario(cfg);
  if (!validation.ok()) throw ConfigError(validation.errors);

  RunResult out;
  out.warnings = validation.warnings;
  const Model model = build_model(cfg);
  State state = initial_state(cfg, model);

  const double T = cfg.final_time;
  const std::size_t n = T > 0.0 ? cfg.solver.steps : 0;
  const double tau = n > 0 ? T / static_cast<double>(n) : 0.0;
  out.tau = tau;
  out.trajectory.tau = tau;
  out.restrictions = check_step_restrictions(T, std::max<std::size_t>(n, 1), cfg.physics.truncation,
                                             cfg.physics.s_flat);

  std::set<std::size_t> snapshot_steps;
  for (double t : cfg.snapshot_times) {
    snapshot_steps.insert(tau > 0.0 ? std::min(n, static_cast<std::size_t>(std::llround(t / tau))) : 0);
  }
  if (snapshot_steps.empty()) snapshot_steps.insert(n);

  InvariantMonitor monitor(model, std::max(cfg.solver.newton_tol, cfg.solver.picard_tol));
  monitor.observe_initial(state);
  out.trajectory.steps.push_back(summarize_state(model, state, 0));
  if (snapshot_steps.count(0) != 0) out.snapshots.push_back(make_snapshot(model.grid, state, 0));

  const double settle_time = last_switch_time(cfg.boundary);
  std::size_t last_step = 0;
  for (std::size_t j = 1; j <= n; ++j) {
    const BoundaryData bc = time_averaged_boundary(cfg.boundary, j, tau);
    StepOutcome step;
    try {
      step = advance_one_step(model, state, bc, tau, cfg.solver);
    } catch (const Error& err) {
      out.failure = "step " + std::to_string(j) + ": " + err.what();
      break;
    }
    step.state.t = static_cast<double>(j) * tau;
    monitor.observe_step(j, state, step.state, step.report);
    out.trajectory.steps.push_back(summarize_state(model, step.state, j, &state));

    auto& tot = out.totals;
    ++tot.steps_completed;
    tot.newton_iters += static_cast<std::size_t>(step.report.newton_iters);
    tot.saturation_picard_iters += static_cast<std::size_t>(step.report.saturation_picard_iters);
    tot.picard_iters += static_cast<std::size_t>(step.report.picard_iters);
    if (step.report.saturation_picard_iters > 0) ++tot.newton_fallbacks;
    tot.max_s_residual = std::max(tot.max_s_residual, step.report.s_residual);
    tot.max_h_residual = std::max(tot.max_h_residual, step.report.h_residual);

    const double change = out.trajectory.steps.back().max_saturation_change;
    state = std::move(step.state);
    last_step = j;
    if (snapshot_steps.count(j) != 0) out.snapshots.push_back(make_snapshot(model.grid, state, j));

    if (cfg.equilibrium_tol > 0.0 && state.t > settle_time && change / tau < cfg.equilibrium_tol) {
      out.stopped_at_equilibrium = j < n;
      break;
    }
  }
  if ((out.failure || out.stopped_at_equilibrium) &&
      (out.snapshots.empty() || out.snapshots.back().step != last_step)) {
    out.snapshots.push_back(make_snapshot(model.grid, state, last_step));
  }
  out.invariants = monitor.report();
  out.final_state = std::move(state);
  return out;
}

ConvergenceStudy run_convergence_study(const ScenarioConfig& cfg, std::size_t levels) {
  if (levels < 2) throw ConfigError("converge.levels: at least two levels required");
  ConvergenceStudy study;
  std::vector<State> finals;
  for (std::size_t k = 0; k < levels; ++k) {
    ScenarioConfig level = cfg;
    level.solver.steps = cfg.solver.steps << k;
    level.snapshot_times.clear();
    level.equilibrium_tol = 0.0;
    auto result = run_scenario(level);
    if (result.failure) {
      throw SolverError("convergence level " + std::to_string(k) + ": " + *result.failure, INFINITY, 0);
    }
    study.steps.push_back(level.solver.steps);
    finals.push_back(std::move(result.final_state));
  }
  auto diff = [](const NodalField& a, const NodalField& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  };
  for (std::size_t k = 0; k + 1 < levels; ++k) {
    study.s_differences.push_back(diff(finals[k].s, finals[k + 1].s));
    study.h_differences.push_back(diff(finals[k].h, finals[k + 1].h));
  }
  for (std::size_t k = 0; k + 1 < study.s_differences.size(); ++k) {
    study.s_orders.push_back(std::log2(study.s_differences[k] / study.s_differences[k + 1]));
    study.h_orders.push_back(std::log2(study.h_differences[k] / study.h_differences[k + 1]));
  }
  return study;
}

}  // namespace lime
