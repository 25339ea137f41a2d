#include "drspcrl/agent.hpp"
#include "drspcrl/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace drspcrl {

using nlohmann::json;

void TrainConfig::validate() const {
    if (kind != "tabular" && kind != "network") {
        throw std::invalid_argument("agent.kind must be \"tabular\" or \"network\"");
    }
    if (total_iterations < 0 || rollout_steps <= 0 || dual_updates < 1 || epochs < 1 || minibatches < 1) {
        throw std::invalid_argument("agent: iteration, rollout, dual-update, epoch and minibatch counts must be positive");
    }
    if (!(dual_lr > 0.0) || !(policy_lr > 0.0) || !(clip > 0.0) || !(max_grad_norm > 0.0) ||
        !(tabular_policy_lr > 0.0) || !(tabular_critic_lr > 0.0 && tabular_critic_lr <= 1.0)) {
        throw std::invalid_argument("agent: learning rates, clip and grad-norm limit must be positive");
    }
    if (!(gamma >= 0.0 && gamma < 1.0) || !(gae_lambda >= 0.0 && gae_lambda <= 1.0)) {
        throw std::invalid_argument("agent: gamma must lie in [0, 1) and gae_lambda in [0, 1]");
    }
    if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0) || !(beta_floor > 0.0) || branch_samples < 0) {
        throw std::invalid_argument("agent: value_coef, entropy_coef >= 0; beta_floor > 0; branch_samples >= 0");
    }
    for (const auto* dims : {&hidden_dims, &dual_hidden_dims}) {
        for (int h : *dims) {
            if (h <= 0) {
                throw std::invalid_argument("agent: hidden dims must be positive");
            }
        }
    }
}

namespace {

// Objective of the sampled dual at beta, and its derivative KL(tilted || uniform) - eps.
double branch_objective(const Vector& v, double beta, double epsilon, double* dbeta) {
    const double m = v.minCoeff();
    const Vector w = (-(v.array() - m) / beta).exp().matrix();
    const double z = w.mean();
    const double log_z = std::log(z);
    if (dbeta != nullptr) {
        const double tilted_shift = w.dot(v.array().matrix() - Vector::Constant(v.size(), m)) / w.sum();
        *dbeta = std::max(-tilted_shift / beta - log_z, 0.0) - epsilon;
    }
    return m - beta * log_z - beta * epsilon;
}

std::vector<std::vector<int>> partition(int n, int parts, std::mt19937_64& rng) {
    std::vector<int> idx(static_cast<std::size_t>(n));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    parts = std::min(parts, n);
    std::vector<std::vector<int>> out;
    for (int p = 0; p < parts; ++p) {
        const auto lo = static_cast<std::ptrdiff_t>(static_cast<long>(p) * n / parts);
        const auto hi = static_cast<std::ptrdiff_t>(static_cast<long>(p + 1) * n / parts);
        out.emplace_back(idx.begin() + lo, idx.begin() + hi);
    }
    return out;
}

template <typename T>
std::vector<T> gather(const std::vector<T>& xs, const std::vector<int>& idx) {
    std::vector<T> out;
    out.reserve(idx.size());
    for (int i : idx) {
        out.push_back(xs[static_cast<std::size_t>(i)]);
    }
    return out;
}

void require_finite(double value, const std::string& what, int iteration) {
    if (!std::isfinite(value)) {
        std::ostringstream msg;
        msg << what << " became non-finite (" << value << ") at iteration " << iteration;
        throw DivergenceError(msg.str());
    }
}

double mean_or_nan(const std::vector<double>& xs) {
    if (xs.empty()) {
        return std::numeric_limits<double>::quiet_NaN();
    }
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

} // namespace

double robust_branch_value(const Vector& branch_values, double beta, double epsilon) {
    if (branch_values.size() == 0) {
        throw std::invalid_argument("robust_branch_value: no branch values");
    }
    if (epsilon == 0.0) {
        return branch_values.mean();
    }
    if (!(beta > 0.0)) {
        throw std::invalid_argument("robust_branch_value: beta must be positive");
    }
    return branch_objective(branch_values, beta, epsilon, nullptr);
}

Vector robust_target(const std::vector<Vector>& next_branch_values, const Vector& beta, double epsilon,
                     const Vector& rewards, const std::vector<bool>& dones, double gamma) {
    const auto n = static_cast<std::size_t>(rewards.size());
    if (next_branch_values.size() != n || static_cast<std::size_t>(beta.size()) != n || dones.size() != n) {
        throw std::invalid_argument("robust_target: per-step inputs differ in length");
    }
    Vector y(rewards.size());
    for (std::size_t t = 0; t < n; ++t) {
        const auto i = static_cast<Eigen::Index>(t);
        y(i) = rewards(i);
        if (!dones[t]) {
            y(i) += gamma * robust_branch_value(next_branch_values[t], beta(i), epsilon);
        }
    }
    return y;
}

Vector gae_advantages(const Vector& targets, const Vector& values, const std::vector<bool>& dones, double gamma,
                      double lambda) {
    if (targets.size() != values.size() || dones.size() != static_cast<std::size_t>(targets.size())) {
        throw std::invalid_argument("gae_advantages: length mismatch");
    }
    Vector adv(targets.size());
    double running = 0.0;
    for (Eigen::Index t = targets.size(); t-- > 0;) {
        const double delta = targets(t) - values(t);
        running = delta + (dones[static_cast<std::size_t>(t)] ? 0.0 : gamma * lambda * running);
        adv(t) = running;
    }
    return adv;
}

void normalize_in_place(Vector& x) {
    if (x.size() == 0) {
        return;
    }
    const double mean = x.mean();
    const double sd = std::sqrt((x.array() - mean).square().mean());
    x = ((x.array() - mean) / (sd + 1e-8)).matrix();
}

// ---------------------------------------------------------------------------
// Dual network

DualNetwork::DualNetwork(MlpSpec spec, double beta_floor, std::mt19937_64& rng)
    : net(std::move(spec), rng), floor(beta_floor) {
    if (net.spec().output_dim != 1) {
        throw std::invalid_argument("DualNetwork: output_dim must be 1");
    }
    if (!(floor > 0.0)) {
        throw std::invalid_argument("DualNetwork: beta floor must be positive");
    }
}

Vector DualNetwork::beta(const Matrix& inputs) const {
    const Matrix z = net.forward(inputs);
    return z.row(0).transpose().unaryExpr([this](double x) { return softplus(x) + floor; });
}

double DualNetwork::loss_and_grad(const Matrix& inputs, const std::vector<Vector>& branch_values, double epsilon,
                                  Vector* grad) const {
    if (branch_values.size() != static_cast<std::size_t>(inputs.cols()) || inputs.cols() == 0) {
        throw std::invalid_argument("DualNetwork::loss_and_grad: need one branch set per input column");
    }
    Mlp::Cache cache;
    const Matrix z = net.forward(inputs, cache);
    const auto batch = static_cast<double>(inputs.cols());
    Matrix upstream(1, inputs.cols());
    double loss = 0.0;
    for (Eigen::Index i = 0; i < inputs.cols(); ++i) {
        const auto& v = branch_values[static_cast<std::size_t>(i)];
        if (v.size() == 0) {
            throw std::invalid_argument("DualNetwork::loss_and_grad: missing branch values");
        }
        const double b = softplus(z(0, i)) + floor;
        double dh = 0.0;
        loss -= branch_objective(v, b, epsilon, &dh) / batch;
        upstream(0, i) = -dh * sigmoid(z(0, i)) / batch;
    }
    if (grad != nullptr) {
        *grad = net.backward(cache, upstream);
    }
    return loss;
}

DualUpdateResult dual_update(DualNetwork& dual, Adam& optimizer, const Matrix& inputs,
                             const std::vector<Vector>& branch_values, double epsilon, int K,
                             const std::vector<std::vector<int>>& minibatches) {
    if (K < 1) {
        throw std::invalid_argument("dual_update: K must be at least 1");
    }
    if (minibatches.empty()) {
        throw std::invalid_argument("dual_update: no minibatches");
    }
    DualUpdateResult out;
    Vector params = dual.net.parameters();
    for (int k = 0; k < K; ++k) {
        const auto& idx = minibatches[static_cast<std::size_t>(k) % minibatches.size()];
        Vector grad;
        const double loss = dual.loss_and_grad(inputs(Eigen::all, idx), gather(branch_values, idx), epsilon, &grad);
        if (!std::isfinite(loss) || !grad.allFinite()) {
            std::ostringstream msg;
            msg << "dual loss became non-finite at update " << k << " (loss " << loss << ", epsilon " << epsilon
                << ")";
            throw DivergenceError(msg.str());
        }
        out.losses.push_back(loss);
        optimizer.step(params, grad);
        dual.net.set_parameters(params);
    }
    out.mean_loss = std::accumulate(out.losses.begin(), out.losses.end(), 0.0) / static_cast<double>(K);
    return out;
}

double estimate_beta_star(const DualNetwork& dual, const Matrix& inputs) {
    if (inputs.cols() == 0) {
        throw std::invalid_argument("estimate_beta_star: empty batch");
    }
    return dual.beta(inputs).mean();
}

// ---------------------------------------------------------------------------
// Policy network

PolicyNetwork::PolicyNetwork(MlpSpec spec, ActionSpace space_, std::mt19937_64& rng)
    : space(std::move(space_)) {
    const int out = space.kind == ActionSpace::Kind::Box ? space.dim() : space.n;
    if (spec.output_dim != out) {
        throw std::invalid_argument("PolicyNetwork: output_dim does not match the action space");
    }
    net = Mlp(std::move(spec), rng, 0.01);
    log_std = gaussian() ? Vector::Zero(out) : Vector();
}

int PolicyNetwork::num_params() const {
    return net.num_params() + static_cast<int>(log_std.size());
}

Vector PolicyNetwork::parameters() const {
    Vector flat(num_params());
    flat << net.parameters(), log_std;
    return flat;
}

void PolicyNetwork::set_parameters(const Vector& flat) {
    if (flat.size() != num_params()) {
        throw std::invalid_argument("PolicyNetwork::set_parameters: wrong parameter count");
    }
    net.set_parameters(flat.head(net.num_params()));
    log_std = flat.tail(log_std.size());
}

namespace {

// Row-wise log-softmax of logits (one column per sample).
Matrix log_softmax(const Matrix& z) {
    Matrix out(z.rows(), z.cols());
    for (Eigen::Index i = 0; i < z.cols(); ++i) {
        const double m = z.col(i).maxCoeff();
        const double lse = m + std::log((z.col(i).array() - m).exp().sum());
        out.col(i) = z.col(i).array() - lse;
    }
    return out;
}

int action_index(const Matrix& actions, Eigen::Index i, int n) {
    const double a = actions(0, i);
    const int k = static_cast<int>(a);
    if (k < 0 || k >= n || static_cast<double>(k) != a) {
        throw std::invalid_argument("discrete action index out of range");
    }
    return k;
}

constexpr double kHalfLog2Pi = 0.91893853320467274178;

} // namespace

Vector PolicyNetwork::log_prob(const Matrix& observations, const Matrix& actions) const {
    const Matrix out = net.forward(observations);
    Vector lp(observations.cols());
    if (gaussian()) {
        if (actions.rows() != out.rows() || actions.cols() != out.cols()) {
            throw std::invalid_argument("log_prob: action matrix shape mismatch");
        }
        const Eigen::ArrayXd inv_std = (-log_std.array()).exp();
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            const Eigen::ArrayXd u = (actions.col(i) - out.col(i)).array() * inv_std;
            lp(i) = (-0.5 * u.square() - log_std.array() - kHalfLog2Pi).sum();
        }
    } else {
        const Matrix ls = log_softmax(out);
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            lp(i) = ls(action_index(actions, i, space.n), i);
        }
    }
    return lp;
}

Vector PolicyNetwork::entropy(const Matrix& observations) const {
    Vector h(observations.cols());
    if (gaussian()) {
        h.setConstant((log_std.array() + 0.5 + kHalfLog2Pi).sum());
        return h;
    }
    const Matrix ls = log_softmax(net.forward(observations));
    for (Eigen::Index i = 0; i < ls.cols(); ++i) {
        h(i) = -(ls.col(i).array().exp() * ls.col(i).array()).sum();
    }
    return h;
}

Vector PolicyNetwork::log_prob_grad(const Matrix& observations, const Matrix& actions, const Vector& upstream,
                                    double entropy_weight) const {
    if (upstream.size() != observations.cols()) {
        throw std::invalid_argument("log_prob_grad: upstream length mismatch");
    }
    Mlp::Cache cache;
    const Matrix out = net.forward(observations, cache);
    Matrix d_out(out.rows(), out.cols());
    Vector grad(num_params());
    if (gaussian()) {
        const Eigen::ArrayXd inv_var = (-2.0 * log_std.array()).exp();
        Eigen::ArrayXd d_log_std = Eigen::ArrayXd::Constant(log_std.size(), entropy_weight * out.cols());
        for (Eigen::Index i = 0; i < out.cols(); ++i) {
            const Eigen::ArrayXd diff = (actions.col(i) - out.col(i)).array();
            d_out.col(i) = (upstream(i) * diff * inv_var).matrix();
            d_log_std += upstream(i) * (diff.square() * inv_var - 1.0);
        }
        grad << net.backward(cache, d_out), d_log_std.matrix();
        return grad;
    }
    const Matrix ls = log_softmax(out);
    for (Eigen::Index i = 0; i < out.cols(); ++i) {
        const Eigen::ArrayXd pi = ls.col(i).array().exp();
        Eigen::ArrayXd g = -upstream(i) * pi;
        g(action_index(actions, i, space.n)) += upstream(i);
        if (entropy_weight != 0.0) {
            const double h = -(pi * ls.col(i).array()).sum();
            g -= entropy_weight * pi * (ls.col(i).array() + h);
        }
        d_out.col(i) = g.matrix();
    }
    return net.backward(cache, d_out);
}

Vector PolicyNetwork::sample(const Vector& observation, std::mt19937_64& rng) const {
    const Vector out = net.forward(observation).col(0);
    if (gaussian()) {
        std::normal_distribution<double> normal(0.0, 1.0);
        Vector a(out.size());
        for (Eigen::Index k = 0; k < out.size(); ++k) {
            a(k) = out(k) + std::exp(log_std(k)) * normal(rng);
        }
        return a;
    }
    const Eigen::ArrayXd pi = log_softmax(out).col(0).array().exp();
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    int k = 0;
    for (; k < space.n - 1; ++k) {
        acc += pi(k);
        if (u < acc) {
            break;
        }
    }
    return Vector::Constant(1, k);
}

Vector PolicyNetwork::mode(const Vector& observation) const {
    const Vector out = net.forward(observation).col(0);
    if (gaussian()) {
        return executable(out);
    }
    Eigen::Index best = 0;
    out.maxCoeff(&best);
    return Vector::Constant(1, static_cast<double>(best));
}

Vector PolicyNetwork::executable(const Vector& sampled) const {
    if (gaussian()) {
        return sampled.cwiseMax(space.low).cwiseMin(space.high);
    }
    return sampled;
}

double ppo_policy_loss(const PolicyNetwork& policy, const Matrix& observations, const Matrix& actions,
                       const Vector& old_log_prob, const Vector& advantages, double clip, double entropy_coef,
                       Vector* grad) {
    const Eigen::Index n = observations.cols();
    if (old_log_prob.size() != n || advantages.size() != n || n == 0) {
        throw std::invalid_argument("ppo_policy_loss: batch length mismatch");
    }
    const Vector lp = policy.log_prob(observations, actions);
    const auto batch = static_cast<double>(n);
    Vector upstream(n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double r = std::exp(lp(i) - old_log_prob(i));
        const double unclipped = r * advantages(i);
        const double clipped = std::clamp(r, 1.0 - clip, 1.0 + clip) * advantages(i);
        loss -= std::min(unclipped, clipped) / batch;
        upstream(i) = unclipped <= clipped ? -unclipped / batch : 0.0;
    }
    if (entropy_coef != 0.0) {
        loss -= entropy_coef * policy.entropy(observations).mean();
    }
    if (grad != nullptr) {
        *grad = policy.log_prob_grad(observations, actions, upstream, -entropy_coef / batch);
    }
    return loss;
}

double clipped_value_loss(const Mlp& critic, const Matrix& observations, const Vector& targets,
                          const Vector& old_values, double clip, double value_coef, Vector* grad) {
    const Eigen::Index n = observations.cols();
    if (targets.size() != n || old_values.size() != n || n == 0) {
        throw std::invalid_argument("clipped_value_loss: batch length mismatch");
    }
    Mlp::Cache cache;
    const Matrix v = critic.forward(observations, cache);
    const auto batch = static_cast<double>(n);
    Matrix upstream(1, n);
    double loss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double diff = v(0, i) - old_values(i);
        const double v_clip = old_values(i) + std::clamp(diff, -clip, clip);
        const double l1 = (v(0, i) - targets(i)) * (v(0, i) - targets(i));
        const double l2 = (v_clip - targets(i)) * (v_clip - targets(i));
        loss += value_coef * 0.5 * std::max(l1, l2) / batch;
        double d = 0.0;
        if (l1 >= l2) {
            d = v(0, i) - targets(i);
        } else if (std::abs(diff) < clip) {
            d = v_clip - targets(i);
        }
        upstream(0, i) = value_coef * d / batch;
    }
    if (grad != nullptr) {
        *grad = critic.backward(cache, upstream);
    }
    return loss;
}

Vector action_features(const ActionSpace& space, const Vector& action) {
    if (space.kind == ActionSpace::Kind::Box) {
        return action;
    }
    return Vector::Unit(space.n, static_cast<Eigen::Index>(action(0)));
}

Vector TabularSoftmaxPolicy::act(const Vector& observation, std::mt19937_64& rng) const {
    const int s = ChainEnv::decode(observation);
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    Eigen::Index a = 0;
    for (; a < table_.cols() - 1; ++a) {
        acc += table_(s, a);
        if (u < acc) {
            break;
        }
    }
    return Vector::Constant(1, static_cast<double>(a));
}

Vector NetworkPolicy::act(const Vector& observation, std::mt19937_64&) const {
    return net_.mode(observation);
}

// ---------------------------------------------------------------------------
// Trainer base

Trainer::Trainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler, std::uint64_t seed)
    : config_(std::move(config)), env_(std::move(env)), scheduler_(std::move(scheduler)), seed_(seed),
      policy_rng_(derive_seed(seed, 0, kPolicyStream)) {
    config_.validate();
    if (!env_) {
        throw std::invalid_argument("Trainer: no environment");
    }
    begin_episode();
}

void Trainer::begin_episode() {
    observation_ = env_->reset(derive_seed(seed_, static_cast<std::uint64_t>(episode_index_++), kEnvStream));
    episode_return_ = 0.0;
    episode_discount_ = 1.0;
}

StepResult Trainer::env_step(const Vector& action) {
    StepResult r = env_->step(action);
    ++env_steps_;
    episode_return_ += episode_discount_ * r.reward;
    episode_discount_ *= env_->return_discount();
    if (r.done) {
        finished_returns_.push_back(episode_return_);
        begin_episode();
    } else {
        observation_ = r.observation;
    }
    return r;
}

json Trainer::save() const {
    return {
        {"kind", config_.kind},
        {"iteration", iteration_},
        {"env_steps", env_steps_},
        {"episode_index", episode_index_},
        {"episode_return", episode_return_},
        {"episode_discount", episode_discount_},
        {"observation", vector_to_json(observation_)},
        {"environment", snapshot_to_json(env_->snapshot())},
        {"policy_rng", engine_state(policy_rng_)},
        {"scheduler", scheduler_state_to_json(scheduler_)},
        {"model", save_model()},
    };
}

void Trainer::load(const json& j) {
    if (j.at("kind").get<std::string>() != config_.kind) {
        throw std::invalid_argument("checkpoint was written by a different agent kind");
    }
    iteration_ = j.at("iteration").get<int>();
    env_steps_ = j.at("env_steps").get<long>();
    episode_index_ = j.at("episode_index").get<long>();
    episode_return_ = j.at("episode_return").get<double>();
    episode_discount_ = j.at("episode_discount").get<double>();
    observation_ = vector_from_json(j.at("observation"));
    env_->restore(snapshot_from_json(j.at("environment")));
    load_engine_state(policy_rng_, j.at("policy_rng").get<std::string>());
    scheduler_state_from_json(scheduler_, j.at("scheduler"));
    load_model(j.at("model"));
}

// ---------------------------------------------------------------------------
// Network trainer

NetworkTrainer::NetworkTrainer(TrainConfig config, std::unique_ptr<Environment> env, Scheduler scheduler,
                               std::uint64_t seed)
    : Trainer(std::move(config), std::move(env), std::move(scheduler), seed),
      branch_rng_(derive_seed(seed, 1, kEnvStream)), minibatch_rng_(derive_seed(seed, 0, kMinibatchStream)) {
    std::mt19937_64 init(derive_seed(seed, 0, kInitStream));
    const ActionSpace space = env_->action_space();
    const int obs_dim = env_->observation_dim();
    const int out = space.kind == ActionSpace::Kind::Box ? space.dim() : space.n;
    const int features = space.kind == ActionSpace::Kind::Box ? space.dim() : space.n;
    policy_ = PolicyNetwork(MlpSpec{obs_dim, config_.hidden_dims, out}, space, init);
    critic_ = Mlp(MlpSpec{obs_dim, config_.hidden_dims, 1}, init);
    dual_ = DualNetwork(MlpSpec{obs_dim + features, config_.dual_hidden_dims, 1}, config_.beta_floor, init);
    actor_critic_opt_ = Adam(policy_.num_params() + critic_.num_params(), config_.policy_lr);
    dual_opt_ = Adam(dual_.net.num_params(), config_.dual_lr);
    branches_ = config_.branch_samples > 0 ? config_.branch_samples : (env_->name() == "chain" ? 8 : 1);
}

MetricsRow NetworkTrainer::train_iteration() {
    finished_returns_.clear();
    const double epsilon = scheduler_.epsilon();
    const int N = config_.rollout_steps;
    const int n = branches_;
    const ActionSpace space = env_->action_space();
    const int obs_dim = env_->observation_dim();
    const int act_rows = space.dim();
    const int features = space.kind == ActionSpace::Kind::Box ? space.dim() : space.n;

    Matrix obs(obs_dim, N);
    Matrix actions(act_rows, N);
    Matrix dual_inputs(obs_dim + features, N);
    Matrix next_obs(obs_dim, static_cast<Eigen::Index>(N) * n);
    std::vector<bool> branch_done(static_cast<std::size_t>(N) * n);
    Vector rewards(N);
    std::vector<bool> dones(static_cast<std::size_t>(N));

    for (int t = 0; t < N; ++t) {
        obs.col(t) = observation_;
        const Vector sampled = policy_.sample(observation_, policy_rng_);
        const Vector action = policy_.executable(sampled);
        actions.col(t) = sampled;
        dual_inputs.col(t) << observation_, action_features(space, action);
        const EnvSnapshot snap = env_->snapshot();
        const auto branches = branch_sample(*env_, snap, action, n, branch_rng_);
        for (int j = 0; j < n; ++j) {
            next_obs.col(static_cast<Eigen::Index>(t) * n + j) = branches[static_cast<std::size_t>(j)].observation;
            branch_done[static_cast<std::size_t>(t) * n + j] = branches[static_cast<std::size_t>(j)].done;
        }
        const StepResult r = env_step(action);
        rewards(t) = r.reward;
        dones[static_cast<std::size_t>(t)] = r.done;
    }

    const Vector old_log_prob = policy_.log_prob(obs, actions);
    const Vector values = critic_.forward(obs).row(0).transpose();
    const Matrix next_values = critic_.forward(next_obs);
    std::vector<Vector> branch_values(static_cast<std::size_t>(N), Vector(n));
    for (int t = 0; t < N; ++t) {
        for (int j = 0; j < n; ++j) {
            const auto k = static_cast<std::size_t>(t) * n + j;
            branch_values[static_cast<std::size_t>(t)](j) = branch_done[k] ? 0.0 : next_values(0, static_cast<Eigen::Index>(k));
        }
    }

    auto batches = partition(N, config_.minibatches, minibatch_rng_);
    const DualUpdateResult dual = dual_update(dual_, dual_opt_, dual_inputs, branch_values, epsilon,
                                              config_.dual_updates, batches);
    const Vector betas = dual_.beta(dual_inputs);
    const Vector targets = robust_target(branch_values, betas, epsilon, rewards, dones, config_.gamma);
    Vector advantages = gae_advantages(targets, values, dones, config_.gamma, config_.gae_lambda);
    const Vector returns = advantages + values;
    normalize_in_place(advantages);

    Vector params(policy_.num_params() + critic_.num_params());
    params << policy_.parameters(), critic_.parameters();
    double policy_loss_sum = 0.0;
    int updates = 0;
    for (int epoch = 0; epoch < config_.epochs; ++epoch) {
        batches = partition(N, config_.minibatches, minibatch_rng_);
        for (const auto& idx : batches) {
            Vector g_pi;
            Vector g_v;
            const double lp = ppo_policy_loss(policy_, obs(Eigen::all, idx), actions(Eigen::all, idx),
                                              old_log_prob(idx), advantages(idx), config_.clip,
                                              config_.entropy_coef, &g_pi);
            const double lv = clipped_value_loss(critic_, obs(Eigen::all, idx), returns(idx), values(idx),
                                                 config_.clip, config_.value_coef, &g_v);
            require_finite(lp, "policy loss", iteration_ + 1);
            require_finite(lv, "value loss", iteration_ + 1);
            Vector g(params.size());
            g << g_pi, g_v;
            clip_grad_norm(g, config_.max_grad_norm);
            actor_critic_opt_.step(params, g);
            policy_.set_parameters(params.head(policy_.num_params()));
            critic_.set_parameters(params.tail(critic_.num_params()));
            policy_loss_sum += lp;
            ++updates;
        }
    }

    const double beta_hat = betas.mean();
    const double robust_value = targets.mean();
    scheduler_.update({iteration_, beta_hat, robust_value, [beta_hat](double) { return beta_hat; }});
    ++iteration_;

    MetricsRow row;
    row.iteration = iteration_;
    row.env_steps = env_steps_;
    row.mean_episode_return = mean_or_nan(finished_returns_);
    row.robust_value_estimate = robust_value;
    row.epsilon = scheduler_.epsilon();
    row.beta_estimate = beta_hat;
    row.policy_loss = policy_loss_sum / updates;
    row.dual_loss = dual.mean_loss;
    return row;
}

std::unique_ptr<Policy> NetworkTrainer::policy() const {
    return std::make_unique<NetworkPolicy>(policy_);
}

namespace {

json adam_to_json(const Adam& a) {
    return {{"m", vector_to_json(a.m)}, {"v", vector_to_json(a.v)}, {"t", a.t}};
}

void adam_from_json(Adam& a, const json& j) {
    a.m = vector_from_json(j.at("m"));
    a.v = vector_from_json(j.at("v"));
    a.t = j.at("t").get<long>();
}

} // namespace

json NetworkTrainer::save_model() const {
    return {
        {"policy", vector_to_json(policy_.parameters())},
        {"critic", vector_to_json(critic_.parameters())},
        {"dual", vector_to_json(dual_.net.parameters())},
        {"actor_critic_adam", adam_to_json(actor_critic_opt_)},
        {"dual_adam", adam_to_json(dual_opt_)},
        {"branch_rng", engine_state(branch_rng_)},
        {"minibatch_rng", engine_state(minibatch_rng_)},
    };
}

void NetworkTrainer::load_model(const json& j) {
    policy_.set_parameters(vector_from_json(j.at("policy")));
    critic_.set_parameters(vector_from_json(j.at("critic")));
    dual_.net.set_parameters(vector_from_json(j.at("dual")));
    adam_from_json(actor_critic_opt_, j.at("actor_critic_adam"));
    adam_from_json(dual_opt_, j.at("dual_adam"));
    load_engine_state(branch_rng_, j.at("branch_rng").get<std::string>());
    load_engine_state(minibatch_rng_, j.at("minibatch_rng").get<std::string>());
}

std::unique_ptr<Trainer> make_trainer(const TrainConfig& config, std::unique_ptr<Environment> env,
                                      Scheduler scheduler, std::uint64_t seed) {
    if (config.kind == "tabular") {
        return std::make_unique<TabularTrainer>(config, std::move(env), std::move(scheduler), seed);
    }
    return std::make_unique<NetworkTrainer>(config, std::move(env), std::move(scheduler), seed);
}

// ---------------------------------------------------------------------------
// JSON helpers

json vector_to_json(const Vector& v) {
    return std::vector<double>(v.data(), v.data() + v.size());
}

Vector vector_from_json(const json& j) {
    const auto xs = j.get<std::vector<double>>();
    return Eigen::Map<const Vector>(xs.data(), static_cast<Eigen::Index>(xs.size()));
}

json snapshot_to_json(const EnvSnapshot& s) {
    return {
        {"env", s.env_name},       {"state", vector_to_json(s.state)}, {"steps", s.steps},
        {"done", s.done},          {"started", s.started},             {"physics", s.physics.values},
        {"rng", engine_state(s.rng)},
    };
}

EnvSnapshot snapshot_from_json(const json& j) {
    EnvSnapshot s;
    s.env_name = j.at("env").get<std::string>();
    s.state = vector_from_json(j.at("state"));
    s.steps = j.at("steps").get<int>();
    s.done = j.at("done").get<bool>();
    s.started = j.at("started").get<bool>();
    s.physics.values = j.at("physics").get<std::map<std::string, double>>();
    load_engine_state(s.rng, j.at("rng").get<std::string>());
    return s;
}

json scheduler_state_to_json(const Scheduler& s) {
    const CurriculumState& c = s.state();
    json history = json::array();
    for (const auto& h : c.history) {
        history.push_back({h.step, h.epsilon, h.beta_estimate});
    }
    json buffer = json::array();
    for (const auto& e : s.regret_buffer().entries) {
        buffer.push_back({e.epsilon, e.score});
    }
    return {
        {"epsilon_t", c.epsilon_t},
        {"epsilon_budget", c.epsilon_budget},
        {"alpha", c.alpha},
        {"lambda_curr", c.lambda_curr},
        {"epsilon_start", c.epsilon_start},
        {"step_count", c.step_count},
        {"history", history},
        {"regret_buffer", buffer},
        {"robust_values", s.robust_value_history()},
        {"rng", s.rng_state()},
    };
}

void scheduler_state_from_json(Scheduler& s, const json& j) {
    CurriculumState c;
    c.epsilon_t = j.at("epsilon_t").get<double>();
    c.epsilon_budget = j.at("epsilon_budget").get<double>();
    c.alpha = j.at("alpha").get<double>();
    c.lambda_curr = j.at("lambda_curr").get<double>();
    c.epsilon_start = j.at("epsilon_start").get<double>();
    c.step_count = j.at("step_count").get<int>();
    for (const auto& h : j.at("history")) {
        c.history.push_back({h.at(0).get<int>(), h.at(1).get<double>(), h.at(2).get<double>()});
    }
    c.validate();
    RegretBuffer buffer;
    for (const auto& e : j.at("regret_buffer")) {
        buffer.entries.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    }
    s.restore(std::move(c), std::move(buffer), j.at("robust_values").get<std::vector<double>>(),
              j.at("rng").get<std::string>());
}

} // namespace drspcrl
