#include "lime/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lime/error.hpp"
#include "lime/format.hpp"
#include "lime/tridiagonal.hpp"

namespace lime {

namespace {

constexpr double kTruncationSlack = 1e-12;
constexpr double kNegativeSaturation = -1e-10;

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

// Per-cell permeability at the cell-mean precipitate.
std::vector<double> cell_permeability(const Model& model, std::span<const double> cP) {
  std::vector<double> k(model.grid.cell_count());
  for (std::size_t c = 0; c < k.size(); ++c) k[c] = model.law(0.5 * (cP[c] + cP[c + 1]));
  return k;
}

// Secant slope of the extended wetting curve.
double secant(const WettingCurve& f, double a, double b) {
  if (a == b) return f.derivative(a);
  return (f(a) - f(b)) / (a - b);
}

// s Q_R(1 - s) and its derivative.
double dryness_product(double s, double R) { return s * truncate_Q(1.0 - s, R); }
double dryness_product_derivative(double s, double R) {
  const double dry = 1.0 - s;
  const double inner = (dry > 0.0 && dry < R) ? 1.0 : 0.0;
  return truncate_Q(dry, R) - s * inner;
}

struct SaturationTerms {
  std::vector<double> k;       // cell permeability, lagged
  std::vector<double> source;  // tau gamma m_w m_i Q_R(h_prev_i)
};

SaturationTerms saturation_terms(const Model& model, const State& prev, double tau) {
  SaturationTerms t;
  t.k = cell_permeability(model, prev.cP);
  t.source.resize(model.grid.node_count());
  const auto& p = model.params;
  for (std::size_t i = 0; i < t.source.size(); ++i) {
    t.source[i] = tau * p.gamma * p.m_w * model.masses[i] * truncate_Q(prev.h[i], p.truncation);
  }
  return t;
}

void saturation_residual_into(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                              const SaturationTerms& terms, std::span<const double> s, std::vector<double>& g) {
  const auto& p = model.params;
  const auto& f = model.curve;
  const std::size_t n = model.grid.node_count();
  g.assign(n, 0.0);
  std::vector<double> fs(n);
  for (std::size_t i = 0; i < n; ++i) {
    fs[i] = f(s[i]);
    g[i] = p.rho_w * model.masses[i] * (s[i] - prev.s[i]) -
           terms.source[i] * dryness_product(s[i], p.truncation);
  }
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double flux = tau * terms.k[c] * (fs[c] - fs[c + 1]) / model.grid.width(c);
    g[c] += flux;
    g[c + 1] -= flux;
  }
  g[0] += tau * bc.left.alpha * (fs[0] - f(bc.left.s_ext));
  g[n - 1] += tau * bc.right.alpha * (fs[n - 1] - f(bc.right.s_ext));
}

TridiagonalSystem saturation_jacobian(const Model& model, const BoundaryData& bc, double tau,
                                      const SaturationTerms& terms, std::span<const double> s) {
  const auto& p = model.params;
  const auto& f = model.curve;
  const std::size_t n = model.grid.node_count();
  TridiagonalSystem J(n);
  std::vector<double> df(n);
  for (std::size_t i = 0; i < n; ++i) {
    df[i] = f.derivative(s[i]);
    J.diag[i] = p.rho_w * model.masses[i] - terms.source[i] * dryness_product_derivative(s[i], p.truncation);
  }
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double a = tau * terms.k[c] / model.grid.width(c);
    J.diag[c] += a * df[c];
    J.upper[c] -= a * df[c + 1];
    J.lower[c + 1] -= a * df[c];
    J.diag[c + 1] += a * df[c + 1];
  }
  J.diag[0] += tau * bc.left.alpha * df[0];
  J.diag[n - 1] += tau * bc.right.alpha * df[n - 1];
  return J;
}

// Frozen-coefficient iteration: secant slopes for the diffusion and boundary
// terms, reaction evaluated at the previous iterate.
bool saturation_picard(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                       const SaturationTerms& terms, const SolverConfig& cfg, std::vector<double>& s,
                       std::vector<double>& g, double& residual, int& iters) {
  const auto& p = model.params;
  const auto& f = model.curve;
  const std::size_t n = model.grid.node_count();
  for (iters = 0; iters < cfg.picard_max_iter;) {
    TridiagonalSystem A(n);
    for (std::size_t i = 0; i < n; ++i) {
      A.diag[i] = p.rho_w * model.masses[i];
      A.rhs[i] = p.rho_w * model.masses[i] * prev.s[i] + terms.source[i] * dryness_product(s[i], p.truncation);
    }
    for (std::size_t c = 0; c + 1 < n; ++c) {
      const double a = tau * terms.k[c] * secant(f, s[c], s[c + 1]) / model.grid.width(c);
      A.diag[c] += a;
      A.upper[c] -= a;
      A.lower[c + 1] -= a;
      A.diag[c + 1] += a;
    }
    const double aL = tau * bc.left.alpha * secant(f, s[0], bc.left.s_ext);
    A.diag[0] += aL;
    A.rhs[0] += aL * bc.left.s_ext;
    const double aR = tau * bc.right.alpha * secant(f, s[n - 1], bc.right.s_ext);
    A.diag[n - 1] += aR;
    A.rhs[n - 1] += aR * bc.right.s_ext;
    s = solve_tridiagonal(A);
    ++iters;
    saturation_residual_into(model, prev, bc, tau, terms, s, g);
    residual = max_abs(g);
    if (residual <= cfg.newton_tol) return true;
  }
  return false;
}

void require_sizes(const Model& model, std::initializer_list<std::span<const double>> fields) {
  for (auto f : fields) {
    if (f.size() != model.grid.node_count()) {
      throw ConfigError("nodal field has " + std::to_string(f.size()) + " entries, grid has " +
                        std::to_string(model.grid.node_count()) + " nodes");
    }
  }
}

}  // namespace

std::vector<std::string> SolverConfig::validate(const std::string& prefix) const {
  std::vector<std::string> problems;
  if (steps < 1) problems.push_back(prefix + ".steps: at least one step required");
  if (!(newton_tol > 0.0)) problems.push_back(prefix + ".newton_tol: must be positive");
  if (!(picard_tol > 0.0)) problems.push_back(prefix + ".picard_tol: must be positive");
  if (newton_max_iter < 1) problems.push_back(prefix + ".newton_max_iter: must be at least 1");
  if (picard_max_iter < 1) problems.push_back(prefix + ".picard_max_iter: must be at least 1");
  if (!(degeneracy_floor > 0.0)) problems.push_back(prefix + ".degeneracy_floor: must be positive");
  return problems;
}

Model make_model(Grid1D grid, PhysParams params, WettingCurve curve, PermeabilityLaw law, MollifierKernel kernel) {
  auto masses = node_lumped_masses(grid);
  auto weights = build_kernel_weights(kernel, grid);
  return Model{std::move(grid), std::move(masses), params, std::move(curve), std::move(law), kernel,
               std::move(weights)};
}

NodalField transport_velocity(const Model& model, std::span<const double> s, std::span<const double> cP) {
  return mollified_velocity(compute_water_flux(s, cP, model.curve, model.law, model.grid), model.weights,
                            model.params.rho_h);
}

State make_state(const Model& model, double t, NodalField s, NodalField h, NodalField cP) {
  require_sizes(model, {s, h, cP});
  State st{t, std::move(s), std::move(h), std::move(cP), {}};
  st.v = transport_velocity(model, st.s, st.cP);
  return st;
}

double RestrictionReport::required_max() const noexcept {
  return std::max({required_monotone, required_lower_bound, required_contraction});
}

std::string RestrictionReport::describe(std::size_t n) const {
  std::ostringstream out;
  out << "steps n = " << n << "\n";
  out << "  monotone saturation operator: n > " << format_shortest(required_monotone) << "\n";
  out << "  saturation lower bound:       n > " << format_shortest(required_lower_bound) << "\n";
  if (degenerate) {
    out << "  hydroxide contraction:        unbounded (lower saturation bound is 0; waived, the"
           " advection term is solved directly)\n";
  } else {
    out << "  hydroxide contraction:        n > " << format_shortest(required_contraction) << "\n";
  }
  out << "  satisfied: " << (satisfied ? "yes" : "no") << ", effective: " << (satisfied_effective ? "yes" : "no")
      << "\n";
  return out.str();
}

RestrictionReport check_step_restrictions(double T, std::size_t n, double R, double s_flat) {
  RestrictionReport r;
  const double tr2 = T * R * R;
  const auto steps = static_cast<double>(n);
  r.required_monotone = tr2;
  r.required_lower_bound = 2.0 * tr2;
  r.degenerate = !(s_flat > 0.0);
  r.required_contraction = r.degenerate ? std::numeric_limits<double>::infinity() : tr2 / (2.0 * s_flat);
  r.satisfied = steps > r.required_monotone && steps > r.required_lower_bound && steps > r.required_contraction;
  r.satisfied_effective = steps > r.required_monotone && steps > r.required_lower_bound &&
                          (r.degenerate || steps > r.required_contraction);
  return r;
}

NodalField saturation_residual(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                               std::span<const double> s) {
  require_sizes(model, {prev.s, prev.h, prev.cP, s});
  std::vector<double> g;
  saturation_residual_into(model, prev, bc, tau, saturation_terms(model, prev, tau), s, g);
  return g;
}

SaturationSolve solve_saturation_step(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                                      const SolverConfig& cfg) {
  require_sizes(model, {prev.s, prev.h, prev.cP});
  const auto& p = model.params;
  if (cfg.enforce_step_restriction) {
    const auto r = check_step_restrictions(tau, 1, p.truncation, p.s_flat);
    if (!(1.0 > r.required_lower_bound)) {
      throw ConfigError("solver.steps: time step " + format_shortest(tau) +
                        " too large for the saturation solve (need 2 tau R^2 < 1)");
    }
  }

  const auto terms = saturation_terms(model, prev, tau);
  SaturationSolve out;
  out.s = prev.s;
  std::vector<double> g;
  saturation_residual_into(model, prev, bc, tau, terms, out.s, g);
  double residual = max_abs(g);

  bool converged = residual <= cfg.newton_tol;
  std::vector<double> trial;
  std::vector<double> g_trial;
  while (!converged && out.newton_iters < cfg.newton_max_iter) {
    auto J = saturation_jacobian(model, bc, tau, terms, out.s);
    for (std::size_t i = 0; i < g.size(); ++i) J.rhs[i] = -g[i];
    const auto delta = solve_tridiagonal(J);
    ++out.newton_iters;

    double lambda = 1.0;
    bool accepted = false;
    while (lambda >= 1.0 / 1024.0) {
      trial = out.s;
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += lambda * delta[i];
      saturation_residual_into(model, prev, bc, tau, terms, trial, g_trial);
      const double r_trial = max_abs(g_trial);
      if (r_trial <= (1.0 - 1e-4 * lambda) * residual || r_trial <= cfg.newton_tol) {
        out.s.swap(trial);
        g.swap(g_trial);
        residual = r_trial;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
    converged = residual <= cfg.newton_tol;
  }

  if (!converged) {
    out.s = prev.s;
    if (!saturation_picard(model, prev, bc, tau, terms, cfg, out.s, g, residual, out.picard_iters)) {
      throw SolverError("saturation solve did not converge (residual " + format_shortest(residual) + ")", residual,
                        out.newton_iters + out.picard_iters);
    }
  }
  out.residual = residual;
  for (std::size_t i = 0; i < out.s.size(); ++i) {
    const double dry = 1.0 - out.s[i];
    if (dry < -kTruncationSlack || dry > p.truncation + kTruncationSlack) out.dryness_truncated = true;
    if (prev.h[i] < 0.0 || prev.h[i] > p.truncation) out.hydroxide_truncated = true;
  }
  return out;
}

namespace {

struct HydroxideAssembly {
  TridiagonalSystem base;           // without boundary inflow
  double inflow_left = 0.0;         // tau beta s_prev at x = 0
  double inflow_right = 0.0;        // tau beta s_prev at x = L
};

HydroxideAssembly assemble_hydroxide(const Model& model, std::span<const double> sp, std::span<const double> vR,
                                     std::span<const double> hp, const BoundaryData& bc, double tau, double floor) {
  const auto& p = model.params;
  const std::size_t n = model.grid.node_count();
  HydroxideAssembly a{TridiagonalSystem(n), tau * bc.left.beta * sp[0], tau * bc.right.beta * sp[n - 1]};
  auto& A = a.base;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = model.masses[i];
    A.diag[i] = p.rho_h * m + tau * p.gamma * p.m_h * m * sp[i] * (1.0 - sp[i]);
    A.rhs[i] = p.rho_h * m * hp[i];
  }
  for (std::size_t c = 0; c + 1 < n; ++c) {
    const double d = tau * p.kappa * std::max(0.5 * (sp[c] + sp[c + 1]), floor) / model.grid.width(c);
    // Upwinded advective flux rho_h (w^+ h_c - w^- h_{c+1}) with the cell-mean velocity.
    const double w = 0.5 * (vR[c] + vR[c + 1]);
    const double out_right = tau * p.rho_h * positive_part(w);
    const double out_left = tau * p.rho_h * positive_part(-w);
    A.diag[c] += d + out_right;
    A.upper[c] -= d + out_left;
    A.lower[c + 1] -= d + out_right;
    A.diag[c + 1] += d + out_left;
  }
  return a;
}

std::vector<double> solve_with_inflow(const HydroxideAssembly& a, const BoundaryData& bc, bool left, bool right) {
  TridiagonalSystem A = a.base;
  const std::size_t n = A.size();
  if (left) {
    A.diag[0] += a.inflow_left;
    A.rhs[0] += a.inflow_left * bc.left.h_ext;
  }
  if (right) {
    A.diag[n - 1] += a.inflow_right;
    A.rhs[n - 1] += a.inflow_right * bc.right.h_ext;
  }
  return solve_tridiagonal(A);
}

}  // namespace

NodalField hydroxide_residual(const Model& model, std::span<const double> sp, std::span<const double> vR,
                              std::span<const double> hp, const BoundaryData& bc, double tau,
                              std::span<const double> h, double floor) {
  require_sizes(model, {sp, vR, hp, h});
  const auto a = assemble_hydroxide(model, sp, vR, hp, bc, tau, floor);
  auto r = multiply(a.base, h);
  const std::size_t n = r.size();
  for (std::size_t i = 0; i < n; ++i) r[i] -= a.base.rhs[i];
  r[0] -= a.inflow_left * positive_part(bc.left.h_ext - h[0]);
  r[n - 1] -= a.inflow_right * positive_part(bc.right.h_ext - h[n - 1]);
  return r;
}

HydroxideSolve solve_hydroxide_step(const Model& model, std::span<const double> sp, std::span<const double> vR,
                                    std::span<const double> hp, const BoundaryData& bc, double tau,
                                    const SolverConfig& cfg) {
  require_sizes(model, {sp, vR, hp});
  const auto& p = model.params;
  for (std::size_t i = 0; i < sp.size(); ++i) {
    if (sp[i] < kNegativeSaturation) {
      throw InvariantError("hydroxide solve: negative saturation " + format_shortest(sp[i]) + " at node " +
                           std::to_string(i) + " gives a negative diffusion coefficient");
    }
  }
  if (cfg.enforce_step_restriction) {
    const auto r = check_step_restrictions(tau, 1, p.truncation, p.s_flat);
    if (!r.degenerate && !(1.0 > r.required_contraction)) {
      throw ConfigError("solver.steps: time step " + format_shortest(tau) +
                        " too large for the hydroxide solve (need tau R^2 < 2 s_flat)");
    }
  }

  const auto a = assemble_hydroxide(model, sp, vR, hp, bc, tau, cfg.degeneracy_floor);
  const std::size_t n = model.grid.node_count();
  auto wants_inflow = [&](std::span<const double> h, bool left) {
    return left ? (a.inflow_left > 0.0 && bc.left.h_ext - h[0] > 0.0)
                : (a.inflow_right > 0.0 && bc.right.h_ext - h[n - 1] > 0.0);
  };
  auto consistent = [&](std::span<const double> h, bool left, bool right) {
    const double gl = bc.left.h_ext - h[0];
    const double gr = bc.right.h_ext - h[n - 1];
    const bool ok_left = a.inflow_left == 0.0 || (left ? gl >= 0.0 : gl <= 0.0);
    const bool ok_right = a.inflow_right == 0.0 || (right ? gr >= 0.0 : gr <= 0.0);
    return ok_left && ok_right;
  };

  HydroxideSolve out;
  bool left = wants_inflow(hp, true);
  bool right = wants_inflow(hp, false);
  bool resolved = false;
  std::vector<std::pair<bool, bool>> seen;
  while (out.iterations < cfg.picard_max_iter) {
    out.h = solve_with_inflow(a, bc, left, right);
    ++out.iterations;
    seen.emplace_back(left, right);
    const bool next_left = wants_inflow(out.h, true);
    const bool next_right = wants_inflow(out.h, false);
    if (next_left == left && next_right == right) {
      resolved = true;
      break;
    }
    if (std::find(seen.begin(), seen.end(), std::pair{next_left, next_right}) != seen.end()) break;
    left = next_left;
    right = next_right;
  }
  if (!resolved) {
    // Cycling between inflow sets: try every configuration of the two boundary points.
    for (int mask = 0; mask < 4 && !resolved; ++mask) {
      left = (mask & 1) != 0;
      right = (mask & 2) != 0;
      out.h = solve_with_inflow(a, bc, left, right);
      ++out.iterations;
      resolved = consistent(out.h, left, right);
    }
  }
  const auto r = hydroxide_residual(model, sp, vR, hp, bc, tau, out.h, cfg.degeneracy_floor);
  out.residual = max_abs(r);
  if (!resolved || out.residual > cfg.picard_tol) {
    throw SolverError("hydroxide solve did not converge (residual " + format_shortest(out.residual) + ")",
                      out.residual, out.iterations);
  }
  out.inflow_left = left && a.inflow_left > 0.0;
  out.inflow_right = right && a.inflow_right > 0.0;
  return out;
}

NodalField update_precipitate(std::span<const double> cP_prev, std::span<const double> h, std::span<const double> s,
                              double tau, double gamma, double m_p) {
  NodalField cP(cP_prev.begin(), cP_prev.end());
  for (std::size_t i = 0; i < cP.size(); ++i) {
    // Clamp rounding-level excursions so the deposit never decreases.
    const double si = std::clamp(s[i], 0.0, 1.0);
    cP[i] += tau * reaction_rate_P(std::max(h[i], 0.0), si, gamma, m_p);
  }
  return cP;
}

double saturation_ledger(const Model& model, const State& prev, const BoundaryData& bc, double tau,
                         std::span<const double> s) {
  const auto& p = model.params;
  const auto& f = model.curve;
  const std::size_t n = s.size();
  double storage = 0.0;
  double reaction = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    storage += model.masses[i] * (s[i] - prev.s[i]);
    reaction += model.masses[i] * truncate_Q(prev.h[i], p.truncation) * s[i] * truncate_Q(1.0 - s[i], p.truncation);
  }
  const double boundary =
      bc.left.alpha * (f(s[0]) - f(bc.left.s_ext)) + bc.right.alpha * (f(s[n - 1]) - f(bc.right.s_ext));
  return p.rho_w * storage + tau * boundary - tau * p.gamma * p.m_w * reaction;
}

double hydroxide_ledger(const Model& model, std::span<const double> sp, std::span<const double> hp,
                        const BoundaryData& bc, double tau, std::span<const double> h) {
  const auto& p = model.params;
  const std::size_t n = h.size();
  double storage = 0.0;
  double reaction = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    storage += model.masses[i] * (h[i] - hp[i]);
    reaction += model.masses[i] * h[i] * sp[i] * (1.0 - sp[i]);
  }
  const double inflow = bc.left.beta * sp[0] * positive_part(bc.left.h_ext - h[0]) +
                        bc.right.beta * sp[n - 1] * positive_part(bc.right.h_ext - h[n - 1]);
  return p.rho_h * storage - tau * inflow + tau * p.gamma * p.m_h * reaction;
}

StepOutcome advance_one_step(const Model& model, const State& state, const BoundaryData& bc, double tau,
                             const SolverConfig& cfg) {
  const auto& p = model.params;
  auto sat = solve_saturation_step(model, state, bc, tau, cfg);

  const auto vR = truncate_velocity(state.v, p.truncation);
  const bool velocity_clipped =
      std::any_of(state.v.begin(), state.v.end(), [&](double v) { return std::abs(v) > p.truncation; });
  auto hyd = solve_hydroxide_step(model, state.s, vR, state.h, bc, tau, cfg);

  auto cP = update_precipitate(state.cP, hyd.h, sat.s, tau, p.gamma, p.m_p);

  StepOutcome out;
  out.report.newton_iters = sat.newton_iters;
  out.report.saturation_picard_iters = sat.picard_iters;
  out.report.picard_iters = hyd.iterations;
  out.report.s_residual = sat.residual;
  out.report.h_residual = hyd.residual;
  out.report.s_mass_ledger_residual = saturation_ledger(model, state, bc, tau, sat.s);
  out.report.h_mass_ledger_residual = hydroxide_ledger(model, state.s, state.h, bc, tau, hyd.h);
  out.report.truncation = {sat.hydroxide_truncated, sat.dryness_truncated, velocity_clipped};
  out.state = make_state(model, state.t + tau, std::move(sat.s), std::move(hyd.h), std::move(cP));
  return out;
}

}  // namespace lime
