#include "drspcrl/curriculum.hpp"
#include "drspcrl/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace drspcrl {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void record(CurriculumState& state, double beta_estimate) {
    state.history.push_back({state.step_count, state.epsilon_t, beta_estimate});
}

} // namespace

CurriculumState CurriculumState::start(double epsilon_start, double epsilon_budget, double alpha,
                                       double lambda_curr) {
    CurriculumState s;
    s.epsilon_start = epsilon_start;
    s.epsilon_budget = epsilon_budget;
    s.alpha = alpha;
    s.lambda_curr = lambda_curr;
    s.validate();
    s.epsilon_t = s.project(epsilon_start);
    return s;
}

void CurriculumState::validate() const {
    if (!(epsilon_budget > 0.0)) {
        throw std::invalid_argument("curriculum: epsilon_budget must be positive");
    }
    if (!(alpha >= 0.0)) {
        throw std::invalid_argument("curriculum: alpha must be nonnegative");
    }
    if (!(lambda_curr > 0.0)) {
        throw std::invalid_argument("curriculum: lambda_curr must be positive");
    }
    if (!(epsilon_start >= 0.0 && epsilon_start <= epsilon_budget)) {
        throw std::invalid_argument("curriculum: epsilon_start must lie in [0, epsilon_budget]");
    }
}

double CurriculumState::project(double epsilon) const {
    if (std::isnan(epsilon)) {
        return 0.0;
    }
    return std::clamp(epsilon, 0.0, epsilon_budget);
}

void validate(const SchedulerConfig& config) {
    std::visit(overloaded{
                   [](const DrSpcrlSchedule&) {},
                   [](const FixedSchedule& c) {
                       if (!(c.epsilon >= 0.0)) {
                           throw std::invalid_argument("fixed schedule: epsilon must be nonnegative");
                       }
                   },
                   [](const LinearSchedule& c) {
                       if (!(c.eps_step >= 0.0) || c.start_iteration < 0) {
                           throw std::invalid_argument("linear schedule: eps_step >= 0, start >= 0");
                       }
                   },
                   [](const PlateauSchedule& c) {
                       if (c.interval <= 0 || c.window <= 0 || c.start_iteration < 0 || !(c.eps_step >= 0.0) ||
                           !(c.threshold >= 0.0)) {
                           throw std::invalid_argument("plateau schedule: invalid parameters");
                       }
                   },
                   [](const RegretBufferSchedule& c) {
                       if (c.buffer_size <= 0 || c.interval <= 0 || !(c.replay_prob >= 0.0 && c.replay_prob <= 1.0) ||
                           !(c.edit_noise_std >= 0.0) || !(c.generator_range >= 0.0)) {
                           throw std::invalid_argument("regret-buffer schedule: invalid parameters");
                       }
                   },
               },
               config);
}

std::string scheduler_name(const SchedulerConfig& config) {
    return std::visit(overloaded{
                          [](const DrSpcrlSchedule&) { return std::string("drspcrl"); },
                          [](const FixedSchedule&) { return std::string("fixed"); },
                          [](const LinearSchedule&) { return std::string("linear"); },
                          [](const PlateauSchedule&) { return std::string("plateau"); },
                          [](const RegretBufferSchedule&) { return std::string("regret_buffer"); },
                      },
                      config);
}

CurriculumState drspcrl_step(CurriculumState state, double beta_estimate) {
    if (!(beta_estimate >= 0.0)) {
        throw std::invalid_argument("drspcrl_step: beta_estimate must be nonnegative");
    }
    const double reg_gradient = 2.0 * state.alpha * (state.epsilon_t - state.epsilon_budget);
    state.epsilon_t = state.project(state.epsilon_t - state.lambda_curr * (beta_estimate + reg_gradient));
    ++state.step_count;
    record(state, beta_estimate);
    return state;
}

CurriculumState linear_step(CurriculumState state, int iteration, const LinearSchedule& config) {
    if (iteration < 0) {
        throw std::invalid_argument("linear_step: iteration must be nonnegative");
    }
    if (iteration >= config.start_iteration) {
        state.epsilon_t = state.project(state.epsilon_t + config.eps_step);
    }
    ++state.step_count;
    return state;
}

CurriculumState plateau_step(CurriculumState state, std::span<const double> history,
                             const PlateauSchedule& config) {
    ++state.step_count;
    const auto w = static_cast<std::size_t>(config.window);
    if (history.size() < 2 * w) {
        return state;
    }
    const auto recent = history.last(w);
    const auto previous = history.subspan(history.size() - 2 * w, w);
    const double mean_recent = std::accumulate(recent.begin(), recent.end(), 0.0) / static_cast<double>(w);
    const double mean_prev = std::accumulate(previous.begin(), previous.end(), 0.0) / static_cast<double>(w);
    const double scale = std::max(std::abs(mean_prev), 1e-12);
    const double improvement = (mean_recent - mean_prev) / scale;
    if (improvement < config.threshold) {
        state.epsilon_t = state.project(state.epsilon_t + config.eps_step);
    }
    return state;
}

CurriculumState regret_step(CurriculumState state, RegretBuffer& buffer, const RegretBufferSchedule& config,
                            std::mt19937_64& rng, const RegretScoreFn& regret_score) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool replay = unit(rng) < config.replay_prob;
    double candidate = 0.0;
    if (replay && !buffer.entries.empty()) {
        const auto best = std::max_element(buffer.entries.begin(), buffer.entries.end(),
                                           [](const auto& a, const auto& b) { return a.score < b.score; });
        double noise = 0.0;
        if (config.edit_noise_std > 0.0) {
            noise = std::normal_distribution<double>(0.0, config.edit_noise_std)(rng);
        }
        candidate = best->epsilon + noise;
    } else {
        double offset = 0.0;
        if (config.generator_range > 0.0) {
            offset = std::uniform_real_distribution<double>(-config.generator_range, config.generator_range)(rng);
        }
        candidate = state.epsilon_t + offset;
    }
    candidate = state.project(candidate);

    const double score = regret_score ? regret_score(candidate) : 0.0;
    auto same = std::find_if(buffer.entries.begin(), buffer.entries.end(),
                             [&](const auto& e) { return e.epsilon == candidate; });
    if (same != buffer.entries.end()) {
        same->score = score;
    } else {
        buffer.entries.push_back({candidate, score});
    }
    while (buffer.entries.size() > static_cast<std::size_t>(config.buffer_size)) {
        buffer.entries.erase(std::min_element(buffer.entries.begin(), buffer.entries.end(),
                                              [](const auto& a, const auto& b) { return a.score < b.score; }));
    }

    state.epsilon_t = candidate;
    ++state.step_count;
    return state;
}

Scheduler::Scheduler(SchedulerConfig config, CurriculumState state, std::uint64_t seed)
    : config_(std::move(config)), state_(std::move(state)), rng_(seed) {
    drspcrl::validate(config_);
    state_.validate();
    if (const auto* fixed = std::get_if<FixedSchedule>(&config_)) {
        state_.epsilon_t = state_.project(fixed->epsilon);
    }
}

void Scheduler::update(const SchedulerSignal& signal) {
    robust_values_.push_back(signal.robust_value);
    const int it = signal.iteration;
    std::visit(overloaded{
                   [&](const DrSpcrlSchedule&) {
                       state_ = drspcrl_step(std::move(state_), std::max(0.0, signal.beta_estimate));
                   },
                   [&](const FixedSchedule&) {
                       ++state_.step_count;
                       record(state_, signal.beta_estimate);
                   },
                   [&](const LinearSchedule& c) {
                       state_ = linear_step(std::move(state_), it, c);
                       record(state_, signal.beta_estimate);
                   },
                   [&](const PlateauSchedule& c) {
                       if (it >= c.start_iteration && (it - c.start_iteration) % c.interval == 0) {
                           state_ = plateau_step(std::move(state_), robust_values_, c);
                       } else {
                           ++state_.step_count;
                       }
                       record(state_, signal.beta_estimate);
                   },
                   [&](const RegretBufferSchedule& c) {
                       if (it > 0 && it % c.interval == 0) {
                           state_ = regret_step(std::move(state_), buffer_, c, rng_, signal.regret_score);
                       } else {
                           ++state_.step_count;
                       }
                       record(state_, signal.beta_estimate);
                   },
               },
               config_);
}

void Scheduler::restore(CurriculumState state, RegretBuffer buffer, std::vector<double> robust_values,
                        const std::string& rng_state) {
    state_ = std::move(state);
    buffer_ = std::move(buffer);
    robust_values_ = std::move(robust_values);
    load_engine_state(rng_, rng_state);
}

std::string Scheduler::rng_state() const {
    return engine_state(rng_);
}

} // namespace drspcrl
