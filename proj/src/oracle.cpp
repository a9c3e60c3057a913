#include <algorithm>
#include <cmath>
#include <utility>

#include "lime/diagnostics.hpp"
#include "lime/error.hpp"

namespace lime {

namespace {

using Dense = std::vector<std::vector<double>>;

// Gaussian elimination with partial pivoting.
std::optional<std::vector<double>> dense_solve(Dense a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t piv = k;
    for (std::size_t r = k + 1; r < n; ++r) {
      if (std::abs(a[r][k]) > std::abs(a[piv][k])) piv = r;
    }
    if (a[piv][k] == 0.0) return std::nullopt;
    std::swap(a[k], a[piv]);
    std::swap(b[k], b[piv]);
    for (std::size_t r = k + 1; r < n; ++r) {
      const double f = a[r][k] / a[k][k];
      for (std::size_t c = k; c < n; ++c) a[r][c] -= f * a[k][c];
      b[r] -= f * b[k];
    }
  }
  std::vector<double> x(n);
  for (std::size_t k = n; k-- > 0;) {
    double acc = b[k];
    for (std::size_t c = k + 1; c < n; ++c) acc -= a[k][c] * x[c];
    x[k] = acc / a[k][k];
  }
  return x;
}

Dense zeros(std::size_t n) { return Dense(n, std::vector<double>(n, 0.0)); }

// Element-by-element lumped masses: each cell gives half its width to both ends.
std::vector<double> element_masses(const Grid1D& grid) {
  std::vector<double> m(grid.node_count(), 0.0);
  for (std::size_t e = 0; e < grid.cell_count(); ++e) {
    const double w = grid.node(e + 1) - grid.node(e);
    m[e] += w / 2.0;
    m[e + 1] += w / 2.0;
  }
  return m;
}

double slope_between(const WettingCurve& f, double a, double b) {
  return a == b ? f.derivative(a) : (f(b) - f(a)) / (b - a);
}

double clip(double v, double R) { return std::min(std::max(v, 0.0), R); }

}  // namespace

std::optional<NodalField> oracle_saturation(const SmallCase& c) {
  const auto& m = c.model;
  const auto& p = m.params;
  const auto& f = m.curve;
  const std::size_t n = m.grid.node_count();
  const auto mass = element_masses(m.grid);
  const double tau = c.tau;
  const double R = p.truncation;

  std::vector<double> s = c.prev.s;
  for (int it = 0; it < 20000; ++it) {
    Dense A = zeros(n);
    std::vector<double> b(n);
    for (std::size_t i = 0; i < n; ++i) {
      A[i][i] += p.rho_w * mass[i];
      b[i] = p.rho_w * mass[i] * c.prev.s[i] +
             tau * p.gamma * p.m_w * mass[i] * clip(c.prev.h[i], R) * s[i] * clip(1.0 - s[i], R);
    }
    for (std::size_t e = 0; e + 1 < n; ++e) {
      const std::size_t a = e;
      const std::size_t z = e + 1;
      const double width = m.grid.node(z) - m.grid.node(a);
      const double k = m.law((c.prev.cP[a] + c.prev.cP[z]) / 2.0);
      const double coeff = tau * k * slope_between(f, s[a], s[z]) / width;
      A[a][a] += coeff;
      A[a][z] -= coeff;
      A[z][a] -= coeff;
      A[z][z] += coeff;
    }
    const std::pair<std::size_t, const BoundaryPointData*> ends[] = {{0, &c.bc.left}, {n - 1, &c.bc.right}};
    for (const auto& [node, bp] : ends) {
      const double coeff = tau * bp->alpha * slope_between(f, bp->s_ext, s[node]);
      A[node][node] += coeff;
      b[node] += coeff * bp->s_ext;
    }
    auto next = dense_solve(A, b);
    if (!next) return std::nullopt;
    double change = 0.0;
    for (std::size_t i = 0; i < n; ++i) change = std::max(change, std::abs((*next)[i] - s[i]));
    s = std::move(*next);
    if (change <= 1e-14) return s;
  }
  return std::nullopt;
}

std::optional<NodalField> oracle_hydroxide(const SmallCase& c, std::span<const double> vR) {
  const auto& m = c.model;
  const auto& p = m.params;
  const std::size_t n = m.grid.node_count();
  const auto mass = element_masses(m.grid);
  const double tau = c.tau;
  const auto& sp = c.prev.s;

  Dense A = zeros(n);
  std::vector<double> b(n);
  for (std::size_t i = 0; i < n; ++i) {
    A[i][i] += p.rho_h * mass[i] + tau * p.gamma * p.m_h * mass[i] * sp[i] * (1.0 - sp[i]);
    b[i] = p.rho_h * mass[i] * c.prev.h[i];
  }
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const std::size_t a = e;
    const std::size_t z = e + 1;
    const double width = m.grid.node(z) - m.grid.node(a);
    const double diff = tau * p.kappa * std::max((sp[a] + sp[z]) / 2.0, c.solver.degeneracy_floor) / width;
    const double w = (vR[a] + vR[z]) / 2.0;
    // Cell flux F = diff (h_a - h_z) + rho_h (w^+ h_a - w^- h_z); node a loses F, node z gains it.
    const double fa = diff + tau * p.rho_h * std::max(w, 0.0);
    const double fz = -diff - tau * p.rho_h * std::max(-w, 0.0);
    A[a][a] += fa;
    A[a][z] += fz;
    A[z][a] -= fa;
    A[z][z] -= fz;
  }

  const double in_left = tau * c.bc.left.beta * sp[0];
  const double in_right = tau * c.bc.right.beta * sp[n - 1];
  for (int mask = 0; mask < 4; ++mask) {
    const bool left = (mask & 1) != 0;
    const bool right = (mask & 2) != 0;
    Dense Am = A;
    auto bm = b;
    if (left) {
      Am[0][0] += in_left;
      bm[0] += in_left * c.bc.left.h_ext;
    }
    if (right) {
      Am[n - 1][n - 1] += in_right;
      bm[n - 1] += in_right * c.bc.right.h_ext;
    }
    auto h = dense_solve(Am, bm);
    if (!h) continue;
    const double gl = c.bc.left.h_ext - (*h)[0];
    const double gr = c.bc.right.h_ext - (*h)[n - 1];
    const bool ok_left = in_left == 0.0 || (left ? gl >= -1e-14 : gl <= 1e-14);
    const bool ok_right = in_right == 0.0 || (right ? gr >= -1e-14 : gr <= 1e-14);
    if (ok_left && ok_right) return h;
  }
  return std::nullopt;
}

OracleComparison oracle_compare_small(const SmallCase& c) {
  OracleComparison out;
  if (c.model.grid.node_count() > 4) {
    out.note = "grid too large for the brute-force oracle";
    return out;
  }
  const auto vR = truncate_velocity(c.prev.v, c.model.params.truncation);
  const auto s_ref = oracle_saturation(c);
  const auto h_ref = oracle_hydroxide(c, vR);
  if (!s_ref || !h_ref) {
    out.note = !s_ref ? "saturation oracle did not converge" : "hydroxide oracle found no consistent inflow set";
    return out;
  }
  const auto s = solve_saturation_step(c.model, c.prev, c.bc, c.tau, c.solver).s;
  const auto h = solve_hydroxide_step(c.model, c.prev.s, vR, c.prev.h, c.bc, c.tau, c.solver).h;
  for (std::size_t i = 0; i < s.size(); ++i) {
    out.saturation_deviation = std::max(out.saturation_deviation, std::abs(s[i] - (*s_ref)[i]));
    out.hydroxide_deviation = std::max(out.hydroxide_deviation, std::abs(h[i] - (*h_ref)[i]));
  }
  out.conclusive = true;
  return out;
}

SmallCase random_small_case(std::mt19937_64& rng) {
  auto uniform = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); };
  auto coin = [&] { return std::bernoulli_distribution(0.5)(rng); };

  const auto cells = std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  Grid1D grid = build_graded_grid(cells, uniform(0.5, 2.0), uniform(0.5, 2.0));

  PhysParams p;
  p.rho_w = uniform(0.5, 2.0);
  p.rho_h = uniform(0.5, 2.0);
  p.m_w = uniform(0.5, 2.0);
  p.m_h = uniform(0.5, 2.0);
  p.m_p = uniform(0.5, 2.0);
  p.m_g = uniform(0.5, 2.0);
  p.gamma = uniform(0.0, 2.0);
  p.kappa = uniform(1e-3, 1.0);
  p.s_flat = uniform(0.05, 0.5);
  p.h_sharp = uniform(0.5, 2.0);
  p.truncation = std::max(1.0, p.h_sharp) * uniform(1.0, 2.0);

  WettingCurve curve;
  if (coin()) {
    curve = WettingCurve::linear(uniform(-1.0, 1.0), uniform(0.5, 2.0));
  } else {
    const auto pts = std::uniform_int_distribution<int>(3, 5)(rng);
    std::vector<double> s{0.0};
    for (int i = 1; i + 1 < pts; ++i) s.push_back(uniform(0.0, 1.0));
    s.push_back(1.0);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::vector<double> pr{uniform(-1.0, 1.0)};
    for (std::size_t i = 1; i < s.size(); ++i) pr.push_back(pr.back() + (s[i] - s[i - 1]) * uniform(0.5, 2.0));
    curve = WettingCurve::tabulated(s, pr);
  }

  PermeabilityLaw law = coin() ? PermeabilityLaw::constant(uniform(1e-3, 1.0))
                               : PermeabilityLaw::exp_decay(1.0, uniform(0.0, 3.0), uniform(0.1, 0.9));
  const MollifierKernel kernel(coin() ? KernelProfile::Triangular : KernelProfile::Bump,
                               uniform(0.1, 1.0) * grid.length());

  const std::size_t n = grid.node_count();
  NodalField s(n), h(n), cP(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = uniform(p.s_flat, 1.0);
    h[i] = uniform(0.0, p.h_sharp);
    cP[i] = uniform(0.0, 2.0);
  }

  BoundaryData bc;
  for (auto* bp : {&bc.left, &bc.right}) {
    bp->alpha = uniform(0.0, 2.0);
    bp->beta = uniform(0.0, 2.0);
    bp->s_ext = uniform(p.s_flat, 1.0);
    bp->h_ext = uniform(0.0, p.h_sharp);
  }
  // Occasionally seal one side completely.
  if (coin()) (coin() ? bc.left : bc.right) = BoundaryPointData{0.0, 0.0, 1.0, 0.0};
  if (bc.left.alpha == 0.0 && bc.right.alpha == 0.0) bc.left.alpha = 1.0;
  if (bc.left.beta == 0.0 && bc.right.beta == 0.0) bc.left.beta = 1.0;

  const auto r = check_step_restrictions(1.0, 1, p.truncation, p.s_flat);
  const double tau_max = 1.0 / std::max(r.required_lower_bound, r.required_contraction);
  const double tau = uniform(0.1, 0.9) * tau_max;

  Model model = make_model(std::move(grid), p, std::move(curve), std::move(law), kernel);
  State prev = make_state(model, 0.0, std::move(s), std::move(h), std::move(cP));
  return SmallCase{std::move(model), std::move(prev), bc, tau, SolverConfig{}};
}

OracleSuiteResult run_oracle_suite(std::uint64_t seed, std::size_t cases) {
  std::mt19937_64 rng(seed);
  OracleSuiteResult out;
  for (std::size_t k = 0; k < cases; ++k) {
    const auto c = random_small_case(rng);
    const auto cmp = oracle_compare_small(c);
    ++out.cases;
    if (!cmp.conclusive) continue;
    ++out.conclusive;
    if (cmp.max_deviation() >= out.max_deviation) {
      out.max_deviation = cmp.max_deviation();
      out.worst_case = k;
    }
  }
  return out;
}

}  // namespace lime
