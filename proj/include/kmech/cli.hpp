#pragma once

// Command-line front end: run configs, simulation output, verification
// suites, the system catalog, closure tables and flat-limit sweeps.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kmech/dynamics.hpp"

namespace kmech::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kBoundary = 2, kFailure = 3 };

/// Raised for invalid run configs; what() is "<source>:<line>:<column>: ...".
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Validates text against the shipped run-config schema and returns the
/// parsed document plus the source line of every JSON pointer in it.
struct ParsedConfig {
    nlohmann::json doc;
    std::map<std::string, int> lines;
    std::string source;

    std::string where(const std::string& pointer) const;
};

ParsedConfig parse_config_text(const std::string& text, const std::string& source = "<config>");
ParsedConfig load_config_file(const std::filesystem::path& path);

const std::string& run_config_schema();

struct RunConfig {
    SystemSpec system;
    Chart chart = Chart::beltrami;
    std::optional<State> initial_state;
    std::optional<PhaseVector> initial_vector;  // raw canonical values, for kappa overrides
    double t_end = 10.0;
    bool t_end_set = false;
    IntegratorConfig integrator;
    std::vector<IntegralSpec> integrals;
    double drift_threshold = 1e-6;
    std::vector<std::string> formats{"csv"};
    bool plot_data = false;
    std::uint64_t seed = 0;
    std::vector<std::string> closure_gammas;
    double closure_tol = 1e-4;
    std::vector<double> sweep_kappas;
    std::size_t sweep_grid = 2001;
};

/// Semantic checks after the schema pass (system parameters, chart domain).
RunConfig run_config_from(const ParsedConfig& parsed);

/// The config's initial coordinates placed on the space of curvature kappa.
State initial_state_at(const RunConfig& config, double kappa);

/// Trajectory rows: t, coordinates, momenta, H, integrals; 17 significant digits.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
nlohmann::json trajectory_json(const Trajectory& traj);

struct SimulateResult {
    int exit_code = kOk;
    nlohmann::json summary;
};

SimulateResult cmd_simulate(const RunConfig& config, const std::optional<std::filesystem::path>& out_dir);

enum class Suite { brackets, structure, independence, flat_limits, all };
Suite suite_from_string(const std::string& name);

struct VerifyOptions {
    Suite suite = Suite::all;
    std::uint64_t seed = 7;
    std::size_t n = 200;
    std::vector<double> kappas;         // empty: suite defaults
    std::vector<std::string> gammas;    // empty: suite defaults
};

/// Deterministic report; "verdict" is "pass" iff every row passes.
nlohmann::json cmd_verify(const VerifyOptions& options);

nlohmann::json catalog();
std::string catalog_text();

nlohmann::json cmd_closure(const RunConfig& config);
nlohmann::json cmd_limit_sweep(const RunConfig& config);

/// Full CLI (argument parsing, logging setup, output); returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kmech::cli
