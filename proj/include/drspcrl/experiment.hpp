#pragma once

#include "drspcrl/agent.hpp"
#include "drspcrl/curriculum.hpp"
#include "drspcrl/environments.hpp"
#include "drspcrl/eval_harness.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drspcrl {

/// Invalid or inconsistent configuration (CLI exit code 2).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Output directory already held by another run.
class RunLockedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct EnvironmentConfig {
    std::string name = "chain";
    ChainConfig chain;
    PendulumConfig pendulum;

    bool operator==(const EnvironmentConfig&) const = default;
};

struct CurriculumConfig {
    double epsilon_start = 0.0;
    double epsilon_budget = 1.0;
    double alpha = 1.0;
    double lambda_curr = 0.01;

    bool operator==(const CurriculumConfig&) const = default;
};

struct EvaluationConfig {
    int episodes = 100;
    std::vector<std::string> kinds{"observation", "action", "environment"};
    std::vector<double> levels{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    bool chart = true;

    bool operator==(const EvaluationConfig&) const = default;
};

struct ExperimentConfig {
    EnvironmentConfig environment;
    TrainConfig agent;
    CurriculumConfig curriculum;
    SchedulerConfig scheduler = DrSpcrlSchedule{};
    EvaluationConfig evaluation;
    std::string output_dir = "runs/default";
    std::uint64_t seed = 0;
    /// Extra checkpoint every this many iterations (0: only the final one).
    int checkpoint_interval = 0;

    /// Throws ConfigError.
    void validate() const;
    bool operator==(const ExperimentConfig&) const;
};

nlohmann::json config_to_json(const ExperimentConfig& config);
/// Unknown keys and wrong types are ConfigErrors; missing keys keep their defaults.
ExperimentConfig config_from_json(const nlohmann::json& j);
/// JSON text with // and /* */ comments allowed.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);
std::string config_hash(const ExperimentConfig& config);

std::unique_ptr<Environment> make_environment(const EnvironmentConfig& config);
Scheduler make_scheduler(const ExperimentConfig& config);
std::unique_ptr<Trainer> build_trainer(const ExperimentConfig& config);

std::string metrics_csv_header();
std::string format_metrics_row(const MetricsRow& row);
std::string sweep_csv_header();
std::string format_sweep_row(const EvalReport& report);

/// Holds <dir>/.lock for the lifetime of the object.
class DirectoryLock {
public:
    explicit DirectoryLock(const std::filesystem::path& dir);
    ~DirectoryLock();
    DirectoryLock(const DirectoryLock&) = delete;
    DirectoryLock& operator=(const DirectoryLock&) = delete;

private:
    std::filesystem::path path_;
};

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<std::string> files;
    std::vector<MetricsRow> rows;
    std::vector<EvalReport> reports;
};

/// Trains for config.agent.total_iterations (continuing from `resume` when given) and writes
/// train.csv, checkpoint.json, config.json and manifest.json into config.output_dir.
RunResult run_train(const ExperimentConfig& config, const std::optional<std::filesystem::path>& resume = {});

/// Evaluates the checkpointed policy for every (kind, level) and writes sweep.csv
/// (plus sweep.svg when charts are on). `config` overrides the checkpoint's own config.
RunResult run_sweep(const std::filesystem::path& checkpoint, const std::optional<ExperimentConfig>& config,
                    const std::filesystem::path& out_dir);

/// Renders a train or sweep CSV as an SVG line chart.
void run_plot(const std::filesystem::path& csv, const std::filesystem::path& svg);

nlohmann::json make_checkpoint(const ExperimentConfig& config, const Trainer& trainer);
/// Rebuilds the trainer recorded in a checkpoint file, together with its config.
std::unique_ptr<Trainer> load_checkpoint(const std::filesystem::path& path, ExperimentConfig* config_out);

} // namespace drspcrl
