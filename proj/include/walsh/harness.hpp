#pragma once

// Experiment configuration, registry, runner and acceptance suite.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "walsh/domain.hpp"
#include "walsh/montecarlo.hpp"

namespace walsh {

/// All knobs of one experiment. Which fields matter depends on the
/// experiment id; the rest keep their defaults and are ignored.
///
/// JSON layout (every section and key optional except "experiment"):
///   { "experiment": id, "seed": u64,
///     "domain": { rays, weights, r, a, outer_radius, lambda, kappa, kappas,
///                 alpha, epsilons, gamma_limit, time },
///     "sim":    { dt, dt_min, horizon, n_paths, threads },
///     "grid":   { nodes, h, h_values },
///     "output": { dir } }
/// gamma_limit accepts a number or the string "inf".
struct ExperimentConfig {
    std::string experiment;
    std::optional<std::uint64_t> seed;

    std::size_t rays = 4;
    std::vector<double> weights;  // empty: uniform
    double r = 0.3;
    double a = 1.0;
    double outer_radius = 1.0;
    double lambda = 0.5;
    double kappa = 1.0;
    std::vector<double> kappas;
    double alpha = -1.0;
    std::vector<double> epsilons;
    double gamma_limit = 1.0;
    double time = 1.0;

    double dt = 1e-3;
    double dt_min = 1e-6;
    double horizon = 1.0;
    std::uint64_t n_paths = 10000;
    unsigned threads = 1;

    std::size_t nodes = 1000;
    double h = 1e-3;
    std::vector<double> h_values;

    std::string output_dir = "walshsim-out";

    bool operator==(const ExperimentConfig&) const = default;

    AngularMeasure measure() const;
    SimConfig sim() const;
};

/// ConfigError with the offending field path ("domain.r: ...").
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig parse_config_text(const std::string& text);
nlohmann::json serialize_config(const ExperimentConfig& c);

/// Sets "section.key" from a command-line string (JSON literal or bare
/// string). ConfigError on unknown keys.
void apply_override(ExperimentConfig& c, const std::string& assignment);

/// Field-level validation against the experiment's needs.
void validate_config(const ExperimentConfig& c);

/// One line of an experiment summary.
struct ResultRow {
    std::string experiment;
    std::string quantity;
    std::string parameters;  // "key=value;..."
    double estimate = 0.0;
    double error = 0.0;  // standard error or residual
    std::optional<double> oracle;
    std::string gate;        // empty when ungated
    std::optional<bool> pass;  // present iff gate is non-empty
    double wall_clock = 0.0;
};

struct CsvFile {
    std::string name;     // file stem, e.g. "hitting_records"
    std::string content;  // including the "# schema=..." header line
};

struct ExperimentOutput {
    std::string experiment;
    std::vector<ResultRow> rows;
    std::vector<CsvFile> files;  // data files besides the summary
    std::vector<std::string> warnings;
    double wall_clock = 0.0;

    /// True unless some gated row failed.
    bool passed() const;
};

struct ExperimentInfo {
    std::string id;
    std::string description;
    std::vector<std::string> gates;
    bool stochastic = false;
    std::function<ExperimentConfig()> defaults;
    std::function<ExperimentOutput(const ExperimentConfig&)> run;
};

/// Registry in a fixed order.
const std::vector<ExperimentInfo>& experiment_registry();
/// ConfigError for unknown ids.
const ExperimentInfo& find_experiment(const std::string& id);

/// Validates and runs; ConfigError before any output for invalid configs.
ExperimentOutput run_experiment(const ExperimentConfig& config);

/// Summary CSV (schema summary/1). With `with_clock` false the wall-clock
/// column is left empty, which makes the text reproducible.
std::string summary_csv(const ExperimentOutput& out, bool with_clock = true);
nlohmann::json summary_json(const ExperimentOutput& out);

/// Writes <dir>/<id>_summary.csv, <id>_summary.json and the data files.
/// Returns the paths written.
std::vector<std::string> write_outputs(const ExperimentOutput& out, const std::string& dir);

/// Output directory after applying the WALSHSIM_OUTPUT_DIR override.
std::string resolve_output_dir(const std::string& configured);

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitPass = 0, kExitGateFailure = 1, kExitConfigError = 2, kExitInternal = 3 };

// ---------------------------------------------------------------------------

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
    double budget = 0.0;
};

struct AcceptanceOptions {
    std::uint64_t seed = 20240611;
    unsigned threads = 1;
    std::vector<int> only;  // empty: all criteria
};

/// Runs the gated acceptance criteria, printing one PASS/FAIL line each to `log`.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& log);

}  // namespace walsh
