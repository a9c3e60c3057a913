#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <optional>

#include "lime/error.hpp"
#include "lime/format.hpp"
#include "lime/io.hpp"

namespace limecli {
namespace {

constexpr int kUsage = 1;

void report_error(std::ostream& err, std::string_view category, const std::string& msg) {
  err << "limesim: error[" << category << "]: " << msg << "\n";
}

int report(std::ostream& err, const lime::Error& e) {
  if (const auto* ce = dynamic_cast<const lime::ConfigError*>(&e)) {
    for (const auto& p : ce->problems()) report_error(err, to_string(e.category()), p);
  } else {
    report_error(err, to_string(e.category()), e.what());
  }
  return e.exit_code();
}

void print_run_summary(std::ostream& out, const lime::ScenarioConfig& cfg, const lime::RunResult& r) {
  out << "scenario " << cfg.name << ": " << r.totals.steps_completed << " of " << cfg.solver.steps
      << " steps, tau = " << lime::format_shortest(r.tau) << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
  const auto& inv = r.invariants;
  auto line = [&](const char* name, bool ok, const std::string& detail) {
    out << "  " << (ok ? "ok  " : "FAIL") << " " << name << "  " << detail << "\n";
  };
  line("saturation bounds", inv.saturation_bounds_ok, "margin " + lime::format_shortest(inv.worst_saturation_margin));
  line("hydroxide >= 0", inv.hydroxide_positive_ok, "margin " + lime::format_shortest(inv.worst_hydroxide_margin));
  line("precipitate monotone", inv.precipitate_monotone_ok,
       "min increment " + lime::format_shortest(inv.min_precipitate_increment));
  line("mass ledgers", inv.ledger_ok,
       "max " + lime::format_shortest(std::max(inv.max_saturation_ledger, inv.max_hydroxide_ledger)) + " <= " +
           lime::format_shortest(inv.ledger_tolerance));
  line("truncation inactive", inv.truncation_inactive, std::to_string(inv.truncation_events) + " events");
  line("velocity bound", inv.velocity_bound_ok, "max ratio " + lime::format_shortest(inv.max_velocity_bound_ratio));
  line("hydroxide ceiling", inv.hydroxide_ceiling_ok, "max h " + lime::format_shortest(inv.max_hydroxide));
  if (r.stopped_at_equilibrium) out << "stopped at equilibrium, t = " << lime::format_shortest(r.final_state.t) << "\n";
}

int execute(const lime::ScenarioConfig& cfg, const std::string& out_dir, std::ostream& out, std::ostream& err) {
  auto result = lime::run_scenario(cfg);
  if (!out_dir.empty()) lime::write_run_outputs(cfg, result, out_dir);
  print_run_summary(out, cfg, result);
  if (!out_dir.empty()) out << "wrote " << result.snapshots.size() << " snapshots to " << out_dir << "\n";
  if (result.failure) {
    report_error(err, "solver", *result.failure);
    return static_cast<int>(lime::ErrorCategory::Solver);
  }
  if (!result.invariants.all_passed()) {
    for (const auto& v : result.invariants.violations) {
      report_error(err, "invariant",
                   v.check + " at step " + std::to_string(v.step) + ", node " + std::to_string(v.node) +
                       " (magnitude " + lime::format_shortest(v.magnitude) + ")");
    }
    if (result.invariants.violations.empty()) report_error(err, "invariant", "invariant monitor failed");
    return static_cast<int>(lime::ErrorCategory::Invariant);
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"limesim: lime consolidation in a porous column"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario from a YAML configuration");
  run_cmd->add_option("config", config_path, "Configuration file")->required();
  run_cmd->add_option("--out", out_dir, "Output directory")->required();

  std::string preset_name;
  std::optional<double> preset_T;
  std::optional<std::size_t> preset_cells, preset_steps;
  std::optional<double> preset_grading;
  bool preset_dump = false;
  auto* preset_cmd = app.add_subcommand("preset", "Run a built-in scenario");
  preset_cmd->add_option("name", preset_name, "fill-dry or stationary")
      ->required()
      ->check(CLI::IsMember({"fill-dry", "stationary"}));
  preset_cmd->add_option("--T", preset_T, "Final time");
  preset_cmd->add_option("--cells", preset_cells, "Number of cells");
  preset_cmd->add_option("--steps", preset_steps, "Number of time steps");
  preset_cmd->add_option("--grading", preset_grading, "Geometric grid ratio (fill-dry)");
  preset_cmd->add_option("--out", out_dir, "Output directory");
  preset_cmd->add_flag("--dump-config", preset_dump, "Print the resolved configuration and exit");

  auto* check_cmd = app.add_subcommand("check", "Validate a configuration");
  check_cmd->add_option("config", config_path, "Configuration file")->required();

  std::size_t levels = 3;
  auto* conv_cmd = app.add_subcommand("converge", "Temporal convergence study (steps n, 2n, 4n, ...)");
  conv_cmd->add_option("config", config_path, "Configuration file")->required();
  conv_cmd->add_option("--levels", levels, "Number of refinement levels")->check(CLI::Range(2, 12));

  std::uint64_t seed = 1;
  std::size_t cases = 200;
  auto* oracle_cmd = app.add_subcommand("oracle", "Compare the solver with brute-force solves on tiny grids");
  oracle_cmd->add_option("--seed", seed, "Random seed");
  oracle_cmd->add_option("--cases", cases, "Number of random cases");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    report_error(err, "usage", e.what());
    return kUsage;
  }

  try {
    if (*run_cmd) return execute(lime::load_config_file(config_path), out_dir, out, err);

    if (*preset_cmd) {
      lime::ScenarioConfig cfg;
      if (preset_name == "fill-dry") {
        lime::FillDryOptions opt;
        if (preset_cells) opt.cells = *preset_cells;
        if (preset_steps) opt.steps = *preset_steps;
        if (preset_grading) opt.grading = *preset_grading;
        cfg = lime::build_fill_dry_scenario(preset_T.value_or(lime::kFillDryDefaultTime), opt);
      } else {
        if (preset_grading) {
          report_error(err, "usage", "--grading applies to the fill-dry preset only");
          return kUsage;
        }
        cfg = lime::build_stationary_scenario(preset_T.value_or(1.0), preset_cells.value_or(16),
                                              preset_steps.value_or(256));
      }
      if (preset_dump) {
        out << lime::serialize_config(cfg);
        return 0;
      }
      return execute(cfg, out_dir, out, err);
    }

    if (*check_cmd) {
      const auto cfg = lime::load_config_file(config_path);
      const auto v = lime::validate_scenario(cfg);
      for (const auto& w : v.warnings) out << "warning: " << w << "\n";
      const auto rr = lime::check_step_restrictions(cfg.final_time, std::max<std::size_t>(cfg.solver.steps, 1),
                                                    cfg.physics.truncation, cfg.physics.s_flat);
      out << rr.describe(cfg.solver.steps) << "\n";
      out << "configuration ok: " << cfg.name << "\n";
      return 0;
    }

    if (*conv_cmd) {
      const auto cfg = lime::load_config_file(config_path);
      const auto study = lime::run_convergence_study(cfg, levels);
      out << "steps        ||ds||_inf              ||dh||_inf\n";
      for (std::size_t k = 0; k < study.s_differences.size(); ++k) {
        out << study.steps[k] << "  " << lime::format_17g(study.s_differences[k]) << "  "
            << lime::format_17g(study.h_differences[k]) << "\n";
      }
      for (std::size_t k = 0; k < study.s_orders.size(); ++k) {
        out << "order " << k + 1 << ": s " << lime::format_shortest(study.s_orders[k]) << ", h "
            << lime::format_shortest(study.h_orders[k]) << "\n";
      }
      return 0;
    }

    if (*oracle_cmd) {
      const auto res = lime::run_oracle_suite(seed, cases);
      out << "cases " << res.cases << ", conclusive " << res.conclusive << ", max deviation "
          << lime::format_shortest(res.max_deviation) << " (case " << res.worst_case << ")\n";
      if (res.max_deviation > 1e-8) {
        report_error(err, "invariant", "solver deviates from the reference by " +
                                           lime::format_shortest(res.max_deviation));
        return static_cast<int>(lime::ErrorCategory::Invariant);
      }
      return 0;
    }
  } catch (const lime::Error& e) {
    return report(err, e);
  } catch (const std::exception& e) {
    report_error(err, "solver", e.what());
    return static_cast<int>(lime::ErrorCategory::Solver);
  }
  return kUsage;
}

}  // namespace limecli
