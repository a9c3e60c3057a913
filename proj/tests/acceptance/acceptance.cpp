// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>

#include "gen.hpp"
#include "lime/diagnostics.hpp"
#include "lime/format.hpp"
#include "lime/io.hpp"
#include "lime/scenario.hpp"

using namespace lime;

namespace {

int failures = 0;

void verdict(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string num(double x) { return format_shortest(x); }

double max_diff(const NodalField& a, const NodalField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

int main() {
  const auto preset = build_fill_dry_scenario(kFillDryDefaultTime);
  const std::size_t nodes = preset.grid.cells + 1;

  const auto t0 = std::chrono::steady_clock::now();
  const auto run = run_scenario(preset);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const auto& inv = run.invariants;

  {
    const bool ok = !run.failure && run.totals.steps_completed == preset.solver.steps && inv.saturation_bounds_ok &&
                    inv.hydroxide_positive_ok && inv.precipitate_monotone_ok && seconds < 30.0;
    verdict(1, ok, "invariant suite on the 64-cell fill-dry preset",
            std::to_string(run.totals.steps_completed) + " steps, s margin " + num(inv.worst_saturation_margin) +
                ", h margin " + num(inv.worst_hydroxide_margin) + ", min cP increment " +
                num(inv.min_precipitate_increment) + ", " + num(std::round(seconds * 100) / 100) + " s" +
                (run.failure ? ", failure: " + *run.failure : ""));
  }

  {
    const double tol = 1e-8 * static_cast<double>(nodes);
    const double worst = std::max(inv.max_saturation_ledger, inv.max_hydroxide_ledger);
    verdict(2, !run.failure && worst <= tol, "water and Ca(OH)2 mass ledgers every step",
            "max residual " + num(worst) + " <= " + num(tol));
  }

  {
    gen::Rng rng(2024);
    double worst = 0.0;
    for (int k = 0; k < 10000; ++k) {
      PhysParams p;
      p.m_w = std::abs(rng.wide(-3, 3));
      p.m_h = std::abs(rng.wide(-3, 3));
      p.m_p = std::abs(rng.wide(-3, 3));
      p.m_g = std::abs(rng.wide(-3, 3));
      const double rate = rng.wide(-8, 8);
      const auto r = stoichiometric_rates(rate, p);
      const double ref = rate / p.m_p;
      for (double q : {r.water / p.m_w, -r.hydroxide / p.m_h, -r.gas / p.m_g}) {
        worst = std::max(worst, std::abs(q - ref) / std::abs(ref));
      }
    }
    verdict(3, worst <= 1e-14, "stoichiometric balance on 10^4 random inputs", "max relative error " + num(worst));
  }

  {
    const auto res = run_oracle_suite(20240601, 400);
    const bool ok = res.conclusive >= 100 && res.max_deviation <= 1e-8;
    verdict(4, ok, "production step vs brute-force reference on tiny grids",
            std::to_string(res.conclusive) + "/" + std::to_string(res.cases) + " conclusive, max deviation " +
                num(res.max_deviation));
  }

  {
    bool ok = false;
    std::string detail;
    try {
      const auto study = run_convergence_study(preset, 3);
      const double so = study.s_orders.at(0), ho = study.h_orders.at(0);
      ok = so >= 0.7 && so <= 1.3 && ho >= 0.7 && ho <= 1.3;
      detail = "steps " + std::to_string(study.steps[0]) + "/" + std::to_string(study.steps[1]) + "/" +
               std::to_string(study.steps[2]) + ", ratio s " +
               num(study.s_differences[0] / study.s_differences[1]) + " (order " + num(so) + "), ratio h " +
               num(study.h_differences[0] / study.h_differences[1]) + " (order " + num(ho) + ")";
    } catch (const std::exception& e) {
      detail = e.what();
    }
    verdict(5, ok, "temporal self-convergence of s and h", detail);
  }

  {
    const auto& last = run.final_state;
    const auto x = build_model(preset).grid.nodes();
    const double L = preset.grid.length;
    double near = -1.0, far = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < nodes; ++i) {
      if (x[i] <= 0.2 * L) near = std::max(near, last.cP[i]);
      if (x[i] >= 0.5 * L) far = std::max(far, last.cP[i]);
      if (last.cP[i] > last.cP[arg]) arg = i;
    }
    const bool ok = !run.failure && near > far && x[arg] <= 0.2 * L;
    verdict(6, ok, "precipitate concentrated near the active boundary",
            "max cP on x<=0.2L " + num(near) + ", on x>=0.5L " + num(far) + ", argmax x = " + num(x[arg]));
  }

  {
    const bool ok = !run.failure && inv.truncation_inactive && inv.velocity_bound_ok;
    verdict(7, ok, "truncations inactive and velocity bound respected",
            std::to_string(inv.truncation_events) + " truncation events, R = " + num(preset.physics.truncation) +
                ", max sup|v| / (C (1 + |grad s|)) = " + num(inv.max_velocity_bound_ratio) + " with C = " +
                num(inv.velocity_bound_constant));
  }

  {
    const auto cfg = build_stationary_scenario();
    const auto res = run_scenario(cfg);
    const auto model = build_model(cfg);
    const auto init = initial_state(cfg, model);
    double dev = res.failure ? INFINITY : 0.0;
    for (const auto& s : res.snapshots) {
      dev = std::max({dev, max_diff(s.s, init.s), max_diff(s.h, init.h), max_diff(s.cP, init.cP),
                      max_diff(s.v, init.v)});
    }
    const bool ok = res.ok() && res.snapshots.size() == cfg.snapshot_times.size() && dev <= 1e-12;
    verdict(8, ok, "stationary preset reproduces its initial state",
            std::to_string(res.snapshots.size()) + " snapshots, max deviation " + num(dev));
  }

  std::printf("%s: %d of 8 criteria failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}
