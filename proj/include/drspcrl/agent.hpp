#pragma once

#include "drspcrl/curriculum.hpp"
#include "drspcrl/environments.hpp"
#include "drspcrl/mlp.hpp"
#include "drspcrl/policy.hpp"

#include "json.hpp"

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace drspcrl {

struct TrainConfig {
    /// "tabular" (exact duals, softmax policy gradient; chain only) or "network".
    std::string kind = "network";
    int total_iterations = 300;
    int rollout_steps = 2048;
    int dual_updates = 5;
    double dual_lr = 5e-4;
    double policy_lr = 3e-4;
    double clip = 0.2;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    int epochs = 10;
    int minibatches = 32;
    double value_coef = 0.5;
    double max_grad_norm = 0.5;
    double entropy_coef = 0.0;
    std::vector<int> hidden_dims{64, 64};
    std::vector<int> dual_hidden_dims{64, 64};
    double beta_floor = 1e-3;
    /// Next-state draws per step for the dual expectation; 0 picks the
    /// environment default (8 for the chain, 1 for the deterministic pendulum).
    int branch_samples = 0;
    double tabular_policy_lr = 5.0;
    double tabular_critic_lr = 0.5;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

/// -beta log((1/n) sum_j exp(-v_j / beta)) - beta eps, stabilized at min(v).
/// eps = 0 gives the branch mean.
double robust_branch_value(const Vector& branch_values, double beta, double epsilon);

/// Per-step robust TD targets r + gamma (1 - done) robust_branch_value(...).
Vector robust_target(const std::vector<Vector>& next_branch_values, const Vector& beta, double epsilon,
                     const Vector& rewards, const std::vector<bool>& dones, double gamma);

/// Generalized advantage estimates from one-step targets: delta_t = y_t - V(s_t).
Vector gae_advantages(const Vector& targets, const Vector& values, const std::vector<bool>& dones, double gamma,
                      double lambda);

void normalize_in_place(Vector& x);

/// beta_phi(s, a) = softplus(mlp([obs; action features])) + floor.
class DualNetwork {
public:
    DualNetwork() = default;
    DualNetwork(MlpSpec spec, double beta_floor, std::mt19937_64& rng);

    Vector beta(const Matrix& inputs) const;
    /// L = -(1/B) sum_i objective(beta_i) and its parameter gradient.
    double loss_and_grad(const Matrix& inputs, const std::vector<Vector>& branch_values, double epsilon,
                         Vector* grad) const;

    Mlp net;
    double floor = 1e-3;
};

struct DualUpdateResult {
    double mean_loss = 0.0;
    std::vector<double> losses;
};

/// K Adam steps on the dual loss, step k on minibatch k mod |minibatches|.
DualUpdateResult dual_update(DualNetwork& dual, Adam& optimizer, const Matrix& inputs,
                             const std::vector<Vector>& branch_values, double epsilon, int K,
                             const std::vector<std::vector<int>>& minibatches);

double estimate_beta_star(const DualNetwork& dual, const Matrix& inputs);

/// Gaussian (Box) or categorical (Discrete) policy on top of an Mlp.
class PolicyNetwork {
public:
    PolicyNetwork() = default;
    PolicyNetwork(MlpSpec spec, ActionSpace space, std::mt19937_64& rng);

    bool gaussian() const { return space.kind == ActionSpace::Kind::Box; }
    int num_params() const;
    Vector parameters() const;
    void set_parameters(const Vector& flat);

    /// Log-probabilities of `actions` (one column per sample; discrete actions are indices).
    Vector log_prob(const Matrix& observations, const Matrix& actions) const;
    /// Gradient of sum_i upstream_i * log_prob_i plus entropy_weight * sum_i entropy_i.
    Vector log_prob_grad(const Matrix& observations, const Matrix& actions, const Vector& upstream,
                         double entropy_weight = 0.0) const;
    Vector entropy(const Matrix& observations) const;

    Vector sample(const Vector& observation, std::mt19937_64& rng) const;
    /// Mean action (clipped) or most likely action.
    Vector mode(const Vector& observation) const;
    /// Executable version of a sampled action.
    Vector executable(const Vector& sampled) const;

    Mlp net;
    Vector log_std;
    ActionSpace space;
};

/// Clipped surrogate loss -(1/B) sum min(r A, clip(r) A) - c_H mean H and its gradient.
double ppo_policy_loss(const PolicyNetwork& policy, const Matrix& observations, const Matrix& actions,
                       const Vector& old_log_prob, const Vector& advantages, double clip, double entropy_coef,
                       Vector* grad);

/// value_coef * 0.5 * mean(max((V - y)^2, (V_old + clip(V - V_old) - y)^2)) and its gradient.
double clipped_value_loss(const Mlp& critic, const Matrix& observations, const Vector& targets,
                          const Vector& old_values, double clip, double value_coef, Vector* grad);

/// Input features of a (state, action) pair for the dual network.
Vector action_features(const ActionSpace& space, const Vector& action);

struct MetricsRow {
    int iteration = 0;
    long env_steps = 0;
    double mean_episode_return = 0.0;
    double robust_value_estimate = 0.0;
    double epsilon = 0.0;
    double beta_estimate = 0.0;
    double policy_loss = 0.0;
    double dual_loss = 0.0;
};

/// Thrown when a loss goes non-finite; the message carries diagnostics.
class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class TabularSoftmaxPolicy : public Policy {
public:
    explicit TabularSoftmaxPolicy(Matrix table) : table_(std::move(table)) {}
    Vector act(const Vector& observation, std::mt19937_64& rng) const override;
    const Matrix& table() const { return table_; }

private:
    Matrix table_;
};

class NetworkPolicy : public Policy {
public:
    explicit NetworkPolicy(PolicyNetwork net) : net_(std::move(net)) {}
    Vector act(const Vector& observation, std::mt19937_64& rng) const override;

private:
    PolicyNetwork net_;
};

/// Training loop shared by the tabular and network variants.
class Trainer {
public:
    Trainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler, std::uint64_t seed);
    virtual ~Trainer() = default;

    /// collect -> dual -> robust targets -> policy update -> beta estimate -> curriculum step.
    virtual MetricsRow train_iteration() = 0;
    virtual std::unique_ptr<Policy> policy() const = 0;

    nlohmann::json save() const;
    void load(const nlohmann::json& checkpoint);

    int iteration() const { return iteration_; }
    long env_steps() const { return env_steps_; }
    const Scheduler& scheduler() const { return scheduler_; }
    const Environment& environment() const { return *env_; }
    const TrainConfig& config() const { return config_; }

protected:
    virtual nlohmann::json save_model() const = 0;
    virtual void load_model(const nlohmann::json& model) = 0;

    /// Steps the environment, tracking episode returns and resetting on episode end.
    StepResult env_step(const Vector& action);
    void begin_episode();

    TrainConfig config_;
    std::unique_ptr<Environment> env_;
    Scheduler scheduler_;
    std::uint64_t seed_;
    int iteration_ = 0;
    long env_steps_ = 0;
    long episode_index_ = 0;
    Vector observation_;
    double episode_return_ = 0.0;
    double episode_discount_ = 1.0;
    std::vector<double> finished_returns_;
    std::mt19937_64 policy_rng_;
};

class TabularTrainer : public Trainer {
public:
    TabularTrainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler, std::uint64_t seed);

    MetricsRow train_iteration() override;
    std::unique_ptr<Policy> policy() const override;

    /// Softmax policy over the tabular model's states.
    Matrix policy_table() const;
    const TabularMdp& model() const { return mdp_; }
    const Vector& critic() const { return critic_; }

    /// Mean exact beta* over the given (s, a) pairs; upper-boundary (unattained) entries are skipped.
    double mean_beta_star(const std::vector<int>& states, const std::vector<int>& actions, double epsilon) const;

protected:
    nlohmann::json save_model() const override;
    void load_model(const nlohmann::json& model) override;

private:
    TabularMdp mdp_;
    Matrix logits_;
    Vector critic_;
    DualSolverConfig dual_config_;
};

class NetworkTrainer : public Trainer {
public:
    NetworkTrainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler, std::uint64_t seed);

    MetricsRow train_iteration() override;
    std::unique_ptr<Policy> policy() const override;

    const PolicyNetwork& policy_network() const { return policy_; }
    const Mlp& critic() const { return critic_; }
    const DualNetwork& dual() const { return dual_; }
    int branch_samples() const { return branches_; }

protected:
    nlohmann::json save_model() const override;
    void load_model(const nlohmann::json& model) override;

private:
    PolicyNetwork policy_;
    Mlp critic_;
    DualNetwork dual_;
    Adam actor_critic_opt_;
    Adam dual_opt_;
    int branches_ = 1;
    std::mt19937_64 branch_rng_;
    std::mt19937_64 minibatch_rng_;
};

std::unique_ptr<Trainer> make_trainer(const TrainConfig& config, std::unique_ptr<Environment> env,
                                      Scheduler scheduler, std::uint64_t seed);

// JSON helpers shared with the experiment runner.
nlohmann::json vector_to_json(const Vector& v);
Vector vector_from_json(const nlohmann::json& j);
nlohmann::json snapshot_to_json(const EnvSnapshot& s);
EnvSnapshot snapshot_from_json(const nlohmann::json& j);
nlohmann::json scheduler_state_to_json(const Scheduler& s);
void scheduler_state_from_json(Scheduler& s, const nlohmann::json& j);

} // namespace drspcrl
