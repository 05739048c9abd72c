#pragma once

#include <filesystem>
#include <json.hpp>
#include <string>

#include "snlab/physical_params.hpp"
#include "snlab/sn_solver.hpp"

namespace snlab {

inline constexpr int csv_schema_version = 1;
inline constexpr int summary_schema_version = 1;

enum class ExperimentKind { gaussian_correlations, sn_effective, bipartite_oracle, signaling, sweep };

const char* to_string(ExperimentKind k);
/// Throws ConfigError for unknown names.
ExperimentKind experiment_kind(const std::string& name);

/// Reads a JSON config file; parse errors become ConfigError.
nlohmann::json load_config(const std::filesystem::path& path);

/// Physical parameters from the "physical" section, coupling inflation applied.
/// Field paths in errors look like "physical.mass_kg".
PhysicalParams physical_params(const nlohmann::json& cfg);
SolverConfig solver_config(const nlohmann::json& cfg);

/// Validates the whole config (strict: unknown keys are errors) without running it.
void validate_config(const nlohmann::json& cfg);

/// Runs the experiment described by `cfg` and writes results, summary.json and
/// manifest.json into `out` (created if needed). Throws ConfigError,
/// InstabilityError or CapacityError.
void run_experiment(const nlohmann::json& cfg, const std::filesystem::path& out);

/// Maps exceptions to exit codes: 0 ok, 2 config, 3 runtime or instability, 4 capacity.
/// `expected` rejects configs of a different kind. Errors go to stderr.
int run_cli(ExperimentKind expected, const std::filesystem::path& config, const std::filesystem::path& out);

}  // namespace snlab
