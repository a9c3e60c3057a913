#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "lime/io.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = limecli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path write_temp(const std::string& name, const std::string& text) {
  const auto p = fs::temp_directory_path() / ("limesim_cli_" + name);
  std::ofstream(p) << text;
  return p;
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("limesim_cli_" + name);
  fs::remove_all(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(cli({}).code, 1);
  EXPECT_EQ(cli({"bogus"}).code, 1);
  const auto r = cli({"preset", "nope"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error[usage]"), std::string::npos);
  EXPECT_EQ(cli({"--help"}).code, 0);
}

TEST(Cli, CheckFillDryPreset) {
  const auto cfg = write_temp("fd.yaml", "preset: fill_dry_default\n");
  const auto r = cli({"check", cfg.string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("effective: yes"), std::string::npos);
}

TEST(Cli, CheckReportsConfigErrors) {
  const auto cfg = write_temp("bad.yaml", "preset: stationary\nboundary: {left: {alpha: -2}}\ngrid: {cells: 0}\n");
  const auto r = cli({"check", cfg.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("limesim: error[config]: boundary.left.alpha"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("grid.cells"), std::string::npos);
  EXPECT_EQ(cli({"check", "/nonexistent/x.yaml"}).code, 2);
}

TEST(Cli, RunStationaryPresetGivesEqualSnapshots) {
  const auto cfg = write_temp("st.yaml", "preset: stationary\n");
  const auto out = fresh_dir("st_out");
  const auto r = cli({"run", cfg.string(), "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<std::string> bodies;
  for (const auto& e : fs::directory_iterator(out)) {
    if (e.path().extension() == ".csv") bodies.push_back(slurp(e.path()));
  }
  ASSERT_EQ(bodies.size(), 4u);
  for (const auto& b : bodies) EXPECT_EQ(b, bodies[0]);
  EXPECT_TRUE(fs::exists(out / "invariants.json"));
  EXPECT_NE(slurp(out / "manifest.json").find("\"status\": \"ok\""), std::string::npos);
}

TEST(Cli, PresetRunIsDeterministic) {
  const auto a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const std::vector<std::string> base{"preset", "fill-dry", "--T", "20", "--cells", "16"};
  auto args = base;
  args.insert(args.end(), {"--out", a.string()});
  const auto ra = cli(args);
  args = base;
  args.insert(args.end(), {"--out", b.string()});
  const auto rb = cli(args);
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_EQ(ra.out.substr(0, ra.out.find("wrote")), rb.out.substr(0, rb.out.find("wrote")));
  for (const auto& e : fs::directory_iterator(a)) EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename()));
}

TEST(Cli, PresetRejectsTooFewSteps) {
  const auto r = cli({"preset", "fill-dry", "--T", "10", "--steps", "100"});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("solver.steps"), std::string::npos);
}

TEST(Cli, DumpConfigParsesBack) {
  const auto r = cli({"preset", "fill-dry", "--T", "40", "--cells", "8", "--dump-config"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(lime::parse_config(r.out), lime::build_fill_dry_scenario(40.0, {8, 1.05, 0}));
}

TEST(Cli, SolverFailureExitCode) {
  const auto cfg = write_temp("fail.yaml",
                              "preset: {name: fill_dry_default, final_time: 20, cells: 16}\n"
                              "solver: {newton_max_iter: 1, picard_max_iter: 1, newton_tol: 1e-15}\n");
  const auto r = cli({"run", cfg.string(), "--out", fresh_dir("fail_out").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("error[solver]"), std::string::npos);
}

TEST(Cli, ConvergeReportsFirstOrder) {
  const auto cfg = write_temp("conv.yaml", "preset: {name: fill_dry_default, final_time: 100, cells: 16}\n");
  const auto r = cli({"converge", cfg.string(), "--levels", "3"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto pos = r.out.find("order 1: s ");
  ASSERT_NE(pos, std::string::npos);
  const double order = std::stod(r.out.substr(pos + 11));
  EXPECT_GT(order, 0.7);
  EXPECT_LT(order, 1.3);
}

TEST(Cli, OracleSuite) {
  const auto r = cli({"oracle", "--cases", "50", "--seed", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("conclusive 50"), std::string::npos);
}
