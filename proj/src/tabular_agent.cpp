#include "drspcrl/agent.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace drspcrl {

using nlohmann::json;

namespace {

const ChainEnv& as_chain(const Environment& env) {
    const auto* chain = dynamic_cast<const ChainEnv*>(&env);
    if (chain == nullptr) {
        throw std::invalid_argument("the tabular agent needs the chain environment, got " + env.name());
    }
    return *chain;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index s = 0; s < logits.rows(); ++s) {
        const Eigen::ArrayXd e = (logits.row(s).array() - logits.row(s).maxCoeff()).exp();
        p.row(s) = e / e.sum();
    }
    return p;
}

struct PairDual {
    double robust_value = 0.0;
    double beta = 0.0;
    bool counted = false; // attained maximizer (finite beta*)
};

} // namespace

TabularTrainer::TabularTrainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler,
                               std::uint64_t seed)
    : Trainer(std::move(config), std::move(env), std::move(scheduler), seed), mdp_(as_chain(*env_).to_tabular()),
      logits_(Matrix::Zero(mdp_.n_states, mdp_.n_actions)), critic_(Vector::Zero(mdp_.n_states)) {}

Matrix TabularTrainer::policy_table() const {
    return softmax_rows(logits_);
}

std::unique_ptr<Policy> TabularTrainer::policy() const {
    return std::make_unique<TabularSoftmaxPolicy>(policy_table());
}

double TabularTrainer::mean_beta_star(const std::vector<int>& states, const std::vector<int>& actions,
                                      double epsilon) const {
    if (epsilon == 0.0) {
        return 0.0;
    }
    double sum = 0.0;
    int count = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        const DualSolution d = solve_dual(mdp_.successor_support(states[i], actions[i], critic_), epsilon, dual_config_);
        if (d.beta_star < dual_config_.beta_max) {
            sum += d.beta_star;
            ++count;
        }
    }
    return count > 0 ? sum / count : 0.0;
}

MetricsRow TabularTrainer::train_iteration() {
    finished_returns_.clear();
    const double epsilon = scheduler_.epsilon();
    const int N = config_.rollout_steps;
    const int S = mdp_.n_states;
    const int A = mdp_.n_actions;
    const double gamma = mdp_.gamma;

    // Exact inner problems for every (s, a) under the current critic.
    std::vector<PairDual> duals(static_cast<std::size_t>(S * A));
    for (int s = 0; s < S; ++s) {
        for (int a = 0; a < A; ++a) {
            const ValueSupport support = mdp_.successor_support(s, a, critic_);
            PairDual& d = duals[static_cast<std::size_t>(s * A + a)];
            if (epsilon == 0.0) {
                d.robust_value = support.nominal_expectation();
                continue;
            }
            const DualSolution sol = solve_dual(support, epsilon, dual_config_);
            d.robust_value = sol.robust_value;
            d.beta = sol.beta_star;
            d.counted = sol.beta_star < dual_config_.beta_max;
        }
    }

    const Matrix pi = policy_table();
    std::vector<int> states(static_cast<std::size_t>(N));
    std::vector<int> actions(static_cast<std::size_t>(N));
    std::vector<bool> dones(static_cast<std::size_t>(N));
    Vector targets(N);
    Vector values(N);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < N; ++t) {
        const int s = ChainEnv::decode(observation_);
        double u = unit(policy_rng_);
        int a = 0;
        for (; a < A - 1; ++a) {
            u -= pi(s, a);
            if (u < 0.0) {
                break;
            }
        }
        const StepResult r = env_step(Vector::Constant(1, a));
        const auto ti = static_cast<std::size_t>(t);
        states[ti] = s;
        actions[ti] = a;
        dones[ti] = r.done;
        values(t) = critic_(s);
        targets(t) = r.reward + (r.done ? 0.0 : gamma * duals[static_cast<std::size_t>(s * A + a)].robust_value);
    }

    Vector advantages = gae_advantages(targets, values, dones, gamma, config_.gae_lambda);
    normalize_in_place(advantages);

    // Softmax policy gradient: grad log pi(a|s) = onehot(a) - pi(s).
    Matrix grad = Matrix::Zero(S, A);
    double policy_loss = 0.0;
    for (int t = 0; t < N; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const int s = states[ti];
        grad.row(s) -= advantages(t) * pi.row(s);
        grad(s, actions[ti]) += advantages(t);
        policy_loss -= advantages(t) * std::log(pi(s, actions[ti])) / N;
    }
    logits_ += config_.tabular_policy_lr * grad / N;

    // Critic: move each visited state toward its mean robust target.
    Vector target_sum = Vector::Zero(S);
    Vector visits = Vector::Zero(S);
    for (int t = 0; t < N; ++t) {
        target_sum(states[static_cast<std::size_t>(t)]) += targets(t);
        visits(states[static_cast<std::size_t>(t)]) += 1.0;
    }
    for (int s = 0; s < S; ++s) {
        if (visits(s) > 0.0) {
            critic_(s) += config_.tabular_critic_lr * (target_sum(s) / visits(s) - critic_(s));
        }
    }

    double beta_sum = 0.0;
    int beta_count = 0;
    double dual_value = 0.0;
    for (int t = 0; t < N; ++t) {
        const auto ti = static_cast<std::size_t>(t);
        const PairDual& d = duals[static_cast<std::size_t>(states[ti] * A + actions[ti])];
        dual_value += d.robust_value / N;
        if (d.counted) {
            beta_sum += d.beta;
            ++beta_count;
        }
    }
    const double beta_hat = beta_count > 0 ? beta_sum / beta_count : 0.0;
    const double robust_value = targets.mean();

    scheduler_.update({iteration_, beta_hat, robust_value, [this, &states, &actions](double eps) {
                           return mean_beta_star(states, actions, eps);
                       }});
    ++iteration_;

    MetricsRow row;
    row.iteration = iteration_;
    row.env_steps = env_steps_;
    row.mean_episode_return = finished_returns_.empty()
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : std::accumulate(finished_returns_.begin(), finished_returns_.end(), 0.0) /
                                        static_cast<double>(finished_returns_.size());
    row.robust_value_estimate = robust_value;
    row.epsilon = scheduler_.epsilon();
    row.beta_estimate = beta_hat;
    row.policy_loss = policy_loss;
    row.dual_loss = -dual_value;
    return row;
}

json TabularTrainer::save_model() const {
    json logits = json::array();
    for (Eigen::Index s = 0; s < logits_.rows(); ++s) {
        logits.push_back(vector_to_json(logits_.row(s).transpose()));
    }
    return {{"logits", logits}, {"critic", vector_to_json(critic_)}};
}

void TabularTrainer::load_model(const json& j) {
    const auto& logits = j.at("logits");
    if (logits.size() != static_cast<std::size_t>(logits_.rows())) {
        throw std::invalid_argument("checkpoint logits have the wrong number of states");
    }
    for (Eigen::Index s = 0; s < logits_.rows(); ++s) {
        const Vector row = vector_from_json(logits.at(static_cast<std::size_t>(s)));
        if (row.size() != logits_.cols()) {
            throw std::invalid_argument("checkpoint logits have the wrong number of actions");
        }
        logits_.row(s) = row.transpose();
    }
    const Vector critic = vector_from_json(j.at("critic"));
    if (critic.size() != critic_.size()) {
        throw std::invalid_argument("checkpoint critic has the wrong number of states");
    }
    critic_ = critic;
}

} // namespace drspcrl
