#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace drspcrl {

struct CurriculumRecord {
    int step = 0;
    double epsilon = 0.0;
    double beta_estimate = 0.0;
};

/// Point-mass curriculum over the robustness budget.
struct CurriculumState {
    double epsilon_t = 0.0;
    double epsilon_budget = 1.0;
    /// Pacing weight pulling epsilon toward the budget.
    double alpha = 1.0;
    /// Effective curriculum learning rate (trust-region multiplier absorbed).
    double lambda_curr = 0.01;
    double epsilon_start = 0.0;
    int step_count = 0;
    std::vector<CurriculumRecord> history;

    static CurriculumState start(double epsilon_start, double epsilon_budget, double alpha,
                                 double lambda_curr);

    void validate() const;
    double project(double epsilon) const;
};

// Scheduler variants. Defaults follow the on-policy column of the baseline tables.
struct DrSpcrlSchedule {
    bool operator==(const DrSpcrlSchedule&) const = default;
};

struct FixedSchedule {
    double epsilon = 1.0;

    bool operator==(const FixedSchedule&) const = default;
};

struct LinearSchedule {
    double eps_step = 0.01;
    int start_iteration = 5;

    bool operator==(const LinearSchedule&) const = default;
};

struct PlateauSchedule {
    int interval = 10;
    int start_iteration = 5;
    double threshold = 0.1;
    int window = 10;
    double eps_step = 0.01;

    bool operator==(const PlateauSchedule&) const = default;
};

struct RegretBufferSchedule {
    int buffer_size = 50;
    double replay_prob = 0.8;
    double edit_noise_std = 0.01;
    double generator_range = 0.02;
    int interval = 100;

    bool operator==(const RegretBufferSchedule&) const = default;
};

using SchedulerConfig =
    std::variant<DrSpcrlSchedule, FixedSchedule, LinearSchedule, PlateauSchedule, RegretBufferSchedule>;

void validate(const SchedulerConfig& config);
std::string scheduler_name(const SchedulerConfig& config);

/// eps <- clamp(eps - lambda_curr * (beta + 2 alpha (eps - budget)), 0, budget).
CurriculumState drspcrl_step(CurriculumState state, double beta_estimate);

CurriculumState linear_step(CurriculumState state, int iteration, const LinearSchedule& config);

/// Raises epsilon by eps_step when the windowed mean of the robust value stopped improving.
CurriculumState plateau_step(CurriculumState state, std::span<const double> robust_value_history,
                             const PlateauSchedule& config);

struct RegretEntry {
    double epsilon = 0.0;
    double score = 0.0;
};

/// Replay buffer of budgets scored by regret (mean dual variable).
struct RegretBuffer {
    std::vector<RegretEntry> entries;
};

using RegretScoreFn = std::function<double(double epsilon)>;

CurriculumState regret_step(CurriculumState state, RegretBuffer& buffer, const RegretBufferSchedule& config,
                            std::mt19937_64& rng, const RegretScoreFn& regret_score);

/// Signals available to a scheduler after one training iteration.
struct SchedulerSignal {
    int iteration = 0;
    double beta_estimate = 0.0;
    double robust_value = 0.0;
    RegretScoreFn regret_score;
};

/// Owns the curriculum state and dispatches to the configured update rule.
class Scheduler {
public:
    Scheduler(SchedulerConfig config, CurriculumState state, std::uint64_t seed = 0);

    double epsilon() const { return state_.epsilon_t; }
    const CurriculumState& state() const { return state_; }
    const SchedulerConfig& config() const { return config_; }
    const RegretBuffer& regret_buffer() const { return buffer_; }
    const std::vector<double>& robust_value_history() const { return robust_values_; }

    void update(const SchedulerSignal& signal);

    // Restoring from a checkpoint.
    void restore(CurriculumState state, RegretBuffer buffer, std::vector<double> robust_values,
                 const std::string& rng_state);
    std::string rng_state() const;

private:
    SchedulerConfig config_;
    CurriculumState state_;
    RegretBuffer buffer_;
    std::vector<double> robust_values_;
    std::mt19937_64 rng_;
};

} // namespace drspcrl
