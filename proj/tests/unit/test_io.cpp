#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gen.hpp"
#include "lime/error.hpp"
#include "lime/format.hpp"
#include "lime/io.hpp"

using namespace lime;
namespace fs = std::filesystem;

namespace {

std::vector<std::string> problems_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

bool mentions(const std::vector<std::string>& problems, const std::string& key) {
  for (const auto& p : problems) {
    if (p.find(key) != std::string::npos) return true;
  }
  return false;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("limesim_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

PiecewiseConstant random_schedule(gen::Rng& rng, double lo, double hi) {
  PiecewiseConstant f;
  const int switches = rng.integer(0, 3);
  double t = 0.0;
  f.values = {rng.uniform(lo, hi)};
  for (int k = 0; k < switches; ++k) {
    t += rng.uniform(0.01, 0.3);
    f.switch_times.push_back(t);
    f.values.push_back(rng.uniform(lo, hi));
  }
  return f;
}

ScenarioConfig random_config(gen::Rng& rng) {
  ScenarioConfig c;
  c.name = rng.coin() ? "case" : "gen: \"quoted\" #1";
  c.grid = {static_cast<std::size_t>(rng.integer(1, 40)), rng.uniform(0.5, 3), rng.uniform(0.8, 1.2)};
  auto& p = c.physics;
  p.rho_w = rng.uniform(0.5, 2);
  p.rho_h = rng.uniform(0.5, 2);
  p.m_w = rng.uniform(1, 100);
  p.m_h = rng.uniform(1, 100);
  p.m_p = rng.uniform(1, 100);
  p.m_g = rng.uniform(1, 100);
  p.gamma = rng.uniform(0, 0.1);
  p.kappa = rng.uniform(1e-4, 1);
  p.s_flat = rng.uniform(0.05, 0.4);
  p.h_sharp = rng.uniform(0.5, 2);
  p.truncation = rng.coin() ? default_truncation_level(p.h_sharp) : rng.uniform(5, 20);
  if (rng.coin()) {
    c.wetting = WettingCurve::linear(rng.uniform(-1, 1), rng.uniform(0.1, 3));
  } else {
    c.wetting = WettingCurve::tabulated({0.0, rng.uniform(0.2, 0.8), 1.0}, {0.0, 0.5, rng.uniform(0.6, 3)});
  }
  c.permeability = rng.coin() ? PermeabilityLaw::constant(rng.uniform(1e-5, 1))
                              : PermeabilityLaw::exp_decay(1.0, rng.uniform(0.1, 3), rng.uniform(0.01, 0.5));
  c.kernel = MollifierKernel(rng.coin() ? KernelProfile::Bump : KernelProfile::Triangular, rng.uniform(0.01, 0.3));
  c.solver.newton_tol = rng.uniform(1e-13, 1e-10);
  c.solver.picard_tol = rng.uniform(1e-13, 1e-10);
  c.solver.newton_max_iter = rng.integer(5, 80);
  c.solver.picard_max_iter = rng.integer(5, 80);
  c.solver.degeneracy_floor = rng.uniform(1e-8, 1e-4);
  c.solver.enforce_step_restriction = rng.coin();
  c.final_time = rng.uniform(0.1, 1.0);
  const double R = p.truncation;
  c.solver.steps = static_cast<std::size_t>(std::ceil(c.final_time * R * R / (2 * p.s_flat) + 2 * c.final_time * R * R)) + 1;
  c.snapshot_times = {c.final_time * rng.uniform(0, 1), c.final_time};
  c.boundary.left = {rng.uniform(0, 2), rng.uniform(0.1, 2), random_schedule(rng, p.s_flat, 1.0),
                     random_schedule(rng, 0.0, p.h_sharp)};
  c.boundary.right = {rng.uniform(0.1, 2), rng.uniform(0, 2), random_schedule(rng, p.s_flat, 1.0),
                      random_schedule(rng, 0.0, p.h_sharp)};
  if (rng.coin()) {
    c.initial_saturation = {rng.vec(c.grid.cells + 1, p.s_flat, 1.0)};
  } else {
    c.initial_saturation = {{rng.uniform(p.s_flat, 1.0)}};
  }
  c.initial_concentration = {{rng.uniform(0, p.h_sharp)}};
  c.equilibrium_tol = rng.coin() ? 0.0 : rng.uniform(1e-9, 1e-5);
  return c;
}

}  // namespace

TEST(Format, ShortestRoundTrip) {
  gen::Rng rng(6);
  for (int k = 0; k < 5000; ++k) {
    const double x = rng.wide(-300, 300);
    EXPECT_EQ(*parse_number(format_shortest(x)), x);
    EXPECT_EQ(*parse_number(format_17g(x)), x);
  }
  EXPECT_EQ(format_shortest(0.1), "0.1");
  EXPECT_FALSE(parse_number("1.0x").has_value());
  EXPECT_FALSE(parse_number("").has_value());
  EXPECT_EQ(*parse_number(" +2e-3 "), 2e-3);
}

TEST(Config, BuiltinPresetMatchesBuilder) {
  EXPECT_EQ(parse_config("preset: fill_dry_default\n"), build_fill_dry_scenario(kFillDryDefaultTime));
  EXPECT_EQ(parse_config("preset: stationary\n"), build_stationary_scenario());
  const auto custom = parse_config("preset: {name: fill_dry_default, final_time: 40, cells: 16}\n");
  EXPECT_EQ(custom, build_fill_dry_scenario(40.0, {16, 1.05, 0}));
}

TEST(Config, PresetWithOverrides) {
  const auto cfg = parse_config("preset: stationary\nname: tweaked\nphysics: {kappa: 0.5}\nkernel: {profile: bump}\n");
  EXPECT_EQ(cfg.name, "tweaked");
  EXPECT_EQ(cfg.physics.kappa, 0.5);
  EXPECT_EQ(cfg.kernel.profile(), KernelProfile::Bump);
  EXPECT_EQ(cfg.kernel.radius(), build_stationary_scenario().kernel.radius());
}

TEST(Config, NegativeAlphaIsNamed) {
  const auto pr = problems_of("preset: stationary\nboundary:\n  left: {alpha: -1}\n");
  ASSERT_FALSE(pr.empty());
  EXPECT_TRUE(mentions(pr, "boundary.left.alpha"));
  EXPECT_TRUE(mentions(pr, "nonnegative"));
}

TEST(Config, EmptyDocumentListsRequiredFields) {
  const auto pr = problems_of("");
  for (const char* key : {"time.final", "time.steps", "grid.cells", "grid.length", "physics.gamma", "physics.kappa",
                          "physics.s_flat", "physics.h_sharp", "permeability", "boundary.left", "boundary.right",
                          "initial.saturation", "initial.concentration"}) {
    EXPECT_TRUE(mentions(pr, key)) << key;
  }
}

TEST(Config, SyntaxErrorHasLineAndColumn) {
  const auto pr = problems_of("grid:\n  cells: [1, 2\n");
  ASSERT_EQ(pr.size(), 1u);
  EXPECT_TRUE(mentions(pr, "line "));
  EXPECT_TRUE(mentions(pr, "column "));
}

TEST(Config, UnknownKeysAndBadValuesReportedTogether) {
  const auto pr = problems_of("preset: stationary\ngrid: {cels: 3, length: abc}\nsolver: {newton_tol: -1}\nextra: 1\n");
  EXPECT_TRUE(mentions(pr, "grid.cels: unknown key"));
  EXPECT_TRUE(mentions(pr, "grid.length: expected a number (line 2"));
  EXPECT_TRUE(mentions(pr, "extra: unknown key"));
  EXPECT_TRUE(mentions(pr, "solver.newton_tol"));
  EXPECT_TRUE(mentions(problems_of("preset: nope\n"), "unknown preset"));
}

TEST(Config, FullDocumentWithoutPreset) {
  const std::string text = R"(name: hand
time: {final: 1, steps: 300, snapshots: [0.5, 1]}
grid: {cells: 4, length: 2}
physics: {gamma: 0.1, kappa: 0.01, s_flat: 0.5, h_sharp: 1}
permeability: {kind: exp_decay, k0: 1, rate: 2, floor: 0.1}
wetting: {kind: tabulated, s: [0, 0.5, 1], p: [0, 1, 3]}
boundary:
  left: {alpha: 1, beta: 1, saturation: {times: [0.5], values: [1, 0.6]}, concentration: 1}
  right: {alpha: 0, beta: 0, saturation: 0.5, concentration: 0}
initial: {saturation: [0.5, 0.6, 0.7, 0.8, 0.9], concentration: 0}
)";
  const auto cfg = parse_config(text);
  EXPECT_EQ(cfg.grid.ratio, 1.0);
  EXPECT_EQ(cfg.kernel.radius(), 0.1);
  EXPECT_EQ(cfg.physics.truncation, 10.0);
  EXPECT_EQ(cfg.boundary.left.saturation.switch_times, (std::vector<double>{0.5}));
  EXPECT_EQ(cfg.initial_saturation.values.size(), 5u);
  EXPECT_EQ(parse_config(serialize_config(cfg)), cfg);
}

TEST(Config, SerializeRoundTripOnRandomConfigs) {
  gen::Rng rng(77);
  for (int k = 0; k < 200; ++k) {
    const auto cfg = random_config(rng);
    ASSERT_TRUE(validate_scenario(cfg).ok()) << validate_scenario(cfg).errors.front();
    const auto text = serialize_config(cfg);
    const auto back = parse_config(text);
    EXPECT_EQ(back, cfg) << text;
    EXPECT_EQ(serialize_config(back), text);
  }
  const auto preset = build_fill_dry_scenario(kFillDryDefaultTime);
  EXPECT_EQ(parse_config(serialize_config(preset)), preset);
}

TEST(Csv, TwoNodeSnapshotAndRoundTrip) {
  Snapshot s{0.5, 3, {0.0, 1.0}, {0.1, 1.0 / 3.0}, {0.0, 2e-300}, {0.0, 0.25}, {-1e-5, 0.0}};
  const auto text = snapshot_csv(s);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 3);
  EXPECT_EQ(text.substr(0, 11), "x,s,h,cP,v\n");
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto back = parse_snapshot_csv(text);
  EXPECT_EQ(back.s, s.s);
  EXPECT_EQ(back.h, s.h);
  EXPECT_EQ(back.v, s.v);
  EXPECT_EQ(snapshot_csv(Snapshot{0.5, 3, back.x, back.s, back.h, back.cP, back.v}), text);
  EXPECT_THROW(parse_snapshot_csv("x,s\n1,2\n"), ConfigError);
}

TEST(Csv, AtomicWriteLeavesNoTemporaries) {
  const auto dir = scratch("atomic");
  Snapshot s{0.0, 0, {0.0, 1.0}, {0.5, 0.5}, {0, 0}, {0, 0}, {0, 0}};
  write_snapshot_csv(s, dir / "a.csv");
  write_snapshot_csv(s, dir / "a.csv");
  EXPECT_EQ(slurp(dir / "a.csv"), snapshot_csv(s));
  EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator{}), 1);
  EXPECT_THROW(write_snapshot_csv(s, dir / "missing" / "a.csv"), ConfigError);
}

TEST(Outputs, FourSnapshotFilesNamedByStepAndTime) {
  const auto cfg = build_fill_dry_scenario(40.0, {16, 1.05, 0});
  const auto r = run_scenario(cfg);
  const auto dir = scratch("outputs");
  write_run_outputs(cfg, r, dir);
  std::size_t csv = 0;
  for (const auto& e : fs::directory_iterator(dir)) csv += e.path().extension() == ".csv";
  EXPECT_EQ(csv, 4u);
  const auto n = cfg.solver.steps;
  EXPECT_TRUE(fs::exists(dir / ("snapshot_" + std::string(8 - std::to_string(n).size(), '0') + std::to_string(n) +
                                "_t40.csv")));
  EXPECT_TRUE(fs::exists(dir / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "invariants.json"));
  EXPECT_EQ(parse_config(slurp(dir / "config.yaml")), cfg);
  EXPECT_EQ(parse_invariant_report(slurp(dir / "invariants.json")), r.invariants);
  // deterministic bytes
  const auto again = scratch("outputs2");
  write_run_outputs(cfg, run_scenario(cfg), again);
  for (const auto& e : fs::directory_iterator(dir)) EXPECT_EQ(slurp(e.path()), slurp(again / e.path().filename()));
}

TEST(Report, InvariantRoundTripIsExact) {
  InvariantReport r;
  r.steps_checked = 12;
  r.ledger_ok = false;
  r.worst_saturation_margin = 1.0 / 3.0;
  r.worst_hydroxide_margin = -2.5e-11;
  r.max_velocity_bound_ratio = 0.1234567890123456789;
  r.ledger_tolerance = 6.5e-11;
  r.violations.push_back({"ledger", 3, 0, 1e-7});
  r.violations.push_back({"saturation_bounds", 4, 9, 5e-300});
  const auto text = serialize_invariant_report(r);
  EXPECT_EQ(parse_invariant_report(text), r);
  EXPECT_EQ(serialize_invariant_report(parse_invariant_report(text)), text);
  EXPECT_THROW(parse_invariant_report("{}"), ConfigError);
}

TEST(Errors, CategoriesAndExitCodes) {
  EXPECT_EQ(to_string(ErrorCategory::Config), "config");
  EXPECT_EQ(ConfigError("x").exit_code(), 2);
  EXPECT_EQ(SolverError("x", 1.0, 3).exit_code(), 3);
  EXPECT_EQ(InvariantError("x").exit_code(), 4);
  const ConfigError both(std::vector<std::string>{"a", "b"});
  EXPECT_EQ(std::string(both.what()), "a; b");
}
