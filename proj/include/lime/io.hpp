#pragma once

// Scenario configuration (YAML), snapshot CSV files, and run manifests.
//
// Configuration layout (every section optional when `preset` is given; see
// README for the full key list):
//
//   name: my_run
//   preset: fill_dry_default        # or {name: fill_dry_default, final_time: 1000, cells: 64, steps: 0}
//   time: {final: 1000, steps: 200004, snapshots: [250, 500], equilibrium_tol: 0}
//   grid: {cells: 64, length: 1, ratio: 1.05}
//   physics: {rho_w: 1, rho_h: 1, m_w: 1, m_h: 1, m_p: 1, m_g: 1,
//             gamma: 0.01, kappa: 0.001, s_flat: 0, h_sharp: 1, truncation: 10}
//   wetting: {kind: linear, offset: 0, slope: 1}
//   permeability: {kind: constant, k0: 2e-4}
//   kernel: {profile: triangular, radius: 0.05}
//   solver: {newton_tol: 1e-12, newton_max_iter: 50, picard_tol: 1e-12,
//            picard_max_iter: 50, enforce_step_restriction: true, degeneracy_floor: 1e-6}
//   boundary:
//     left:  {alpha: 1, beta: 1, saturation: {times: [250], values: [1, 0.01]},
//             concentration: {times: [250], values: [1, 0]}}
//     right: {alpha: 1, beta: 0, saturation: 0, concentration: 0}
//   initial: {saturation: 0, concentration: 0}

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "lime/diagnostics.hpp"
#include "lime/scenario.hpp"

namespace lime {

inline constexpr double kFillDryDefaultTime = 1000.0;

/// Built-in configurations: "fill_dry_default" and "stationary".
std::optional<ScenarioConfig> builtin_preset(std::string_view name);

/// Parses and validates. Throws ConfigError: syntax errors carry line and
/// column; validation errors list every problem with its field path.
ScenarioConfig parse_config(const std::string& text);
ScenarioConfig load_config_file(const std::filesystem::path& path);

/// Complete, explicit document; parse_config(serialize_config(c)) == c.
std::string serialize_config(const ScenarioConfig& cfg);

/// Header `x,s,h,cP,v`, then one row per node with 17 significant digits.
std::string snapshot_csv(const Snapshot& snapshot);
/// Reads the nodal columns back; time and step are not stored in the file.
Snapshot parse_snapshot_csv(const std::string& text);
void write_snapshot_csv(const Snapshot& snapshot, const std::filesystem::path& destination);
std::string snapshot_file_name(const Snapshot& snapshot);

std::string serialize_invariant_report(const InvariantReport& report);
InvariantReport parse_invariant_report(const std::string& text);

/// Writes content to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Snapshots, manifest.json, invariants.json and the resolved config.yaml.
void write_run_outputs(const ScenarioConfig& cfg, const RunResult& result, const std::filesystem::path& dir);

std::string run_status(const RunResult& result);

}  // namespace lime
