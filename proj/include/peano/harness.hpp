#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "peano/dynamics.hpp"
#include "peano/exitlab.hpp"

namespace peano::harness {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericalError = 3, kValidationError = 4 };

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& field, const std::string& msg)
        : std::runtime_error("config field '" + field + "': " + msg), field_(field) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

enum class Experiment { simulate, select_prob, exit_time, box_exit, ramp, scaling_report, validate_noise };
std::string to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

enum class Format { csv, json };

struct ExperimentConfig {
    Experiment experiment = Experiment::select_prob;
    dynamics::ModelParams params;  // epsilon is taken from eps_grid
    std::vector<double> eps_grid{1e-3};
    long n_paths = 1000;
    double horizon = 1.0;
    std::uint64_t master_seed = 20240101;
    std::optional<int> workers;  // empty = PEANO_WORKERS or hardware
    std::string output_path;     // empty = stdout
    Format format = Format::csv;
    bool timing = false;
    // Experiment-specific knobs, with every default written back by
    // materialize() so outputs are self-describing.
    nlohmann::json options = nlohmann::json::object();
};

ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
// Fills every default into `options` and returns the full config as JSON.
nlohmann::json materialize(ExperimentConfig& cfg);

int resolve_workers(const ExperimentConfig& cfg);

// Worker pool over path indices; tasks are independent and write into
// per-index slots, so scheduling never changes results.
class ThreadExecutor final : public exitlab::Executor {
public:
    explicit ThreadExecutor(int workers) : workers_(workers < 1 ? 1 : workers) {}
    void for_each(std::size_t n, const std::function<void(std::size_t)>& task) const override;
    int workers() const noexcept { return workers_; }

private:
    int workers_;
};

struct ResultRow {
    std::string experiment;
    dynamics::ModelParams params;
    double epsilon = 0.0;
    long n_paths = 0;
    double horizon = 0.0;
    std::string quantity;
    double point = 0.0;
    std::optional<double> std_error, ci_lo, ci_hi;
    std::optional<double> runtime_ms;
    std::uint64_t master_seed = 0;
    std::vector<std::string> flags;
};

ResultRow estimate_row(const ExperimentConfig& cfg, double eps, const std::string& quantity,
                       const stats::EstimateWithCI& e);

struct RunResult {
    std::vector<ResultRow> rows;
    nlohmann::json extra = nlohmann::json::object();
    int status = kOk;
    std::vector<std::string> failures;  // validation failures
};

// Dispatches the experiment. Throws ConfigError, DomainError or NumericalFailure.
RunResult execute(ExperimentConfig& cfg);

// Oracle suite for the noise module.
RunResult validate_noise(ExperimentConfig& cfg);

extern const char* const kCsvHeader;
void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
nlohmann::json to_json(const ExperimentConfig& cfg, const RunResult& r);
void print_summary(std::ostream& os, const RunResult& r, double runtime_ms);

// Full CLI flow: parse, execute, emit. Returns the process exit code.
int run(ExperimentConfig& cfg, std::ostream& summary, std::ostream& err);

}  // namespace peano::harness
