#pragma once

#include "bsf/optimize.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace bsf {

/// Process exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk           = 0,
    kExitConfig       = 2,
    kExitNumerical    = 3,
    kExitNotConverged = 4,
};

/// Validated run configuration. Everything downstream can assume it is consistent.
struct RunConfig {
    Diet diet        = Diet::Water;
    int horizon_days = 14;
    double dt        = kDefaultStep;
    /// Explicit initial counts; when absent the population is calibrated to `calibrate_mass_mg`
    /// on the benchmark schedule.
    std::optional<double> N_f0;
    std::optional<double> N_m0;
    double calibrate_mass_mg = 447.6;
    MatedMortality mated_mortality = MatedMortality::Mean;
    OCPWeights weights;
    ControlSchedule schedule;
    SolveOptions solver;
};

/// Parses and validates a config document. `base_dir` resolves relative schedule CSV paths.
/// Throws Error(ConfigError) with the offending field in the message.
RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Model parameters for a config, including the (possibly calibrated) initial population.
ModelParams model_params(const RunConfig& config);

/// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

/// Reads BSF_LOG (error, info, debug) and configures the global logger.
void configure_logging();

/// Entry point of the `bsf` tool; returns the process exit code.
int run_cli(const std::vector<std::string>& args);

} // namespace bsf
