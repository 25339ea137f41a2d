#include "drspcrl/environments.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace drspcrl {

double PhysicsParams::at(const std::string& name) const {
    const auto it = values.find(name);
    if (it == values.end()) {
        throw std::out_of_range("unknown physics parameter '" + name + "'");
    }
    return it->second;
}

void PhysicsParams::validate() const {
    for (const auto& [name, v] : values) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("physics parameter '" + name + "' is not finite");
        }
        if (name == "slip_prob") {
            if (v < 0.0 || v > 0.5) {
                throw std::invalid_argument("slip_prob must lie in [0, 0.5]");
            }
        } else if (name == "damping") {
            if (v < 0.0) {
                throw std::invalid_argument("damping must be nonnegative");
            }
        } else if (!(v > 0.0)) {
            throw std::invalid_argument("physics parameter '" + name + "' must be positive");
        }
    }
}

ActionSpace ActionSpace::discrete(int n) {
    if (n <= 0) {
        throw std::invalid_argument("discrete action space needs n > 0");
    }
    ActionSpace s;
    s.kind = Kind::Discrete;
    s.n = n;
    return s;
}

ActionSpace ActionSpace::box(Vector low, Vector high) {
    if (low.size() != high.size() || low.size() == 0 || (low.array() > high.array()).any()) {
        throw std::invalid_argument("box action space needs matching bounds with low <= high");
    }
    ActionSpace s;
    s.kind = Kind::Box;
    s.low = std::move(low);
    s.high = std::move(high);
    return s;
}

bool ActionSpace::contains(const Vector& action) const {
    if (action.size() != dim() || !action.allFinite()) {
        return false;
    }
    if (kind == Kind::Discrete) {
        const double a = action(0);
        return a == std::floor(a) && a >= 0.0 && a < n;
    }
    return (action.array() >= low.array()).all() && (action.array() <= high.array()).all();
}

Environment::Environment(PhysicsParams nominal) : nominal_(std::move(nominal)), physics_(nominal_) {
    nominal_.validate();
}

void Environment::set_physics(PhysicsParams params) {
    for (const auto& [name, _] : params.values) {
        if (!nominal_.values.contains(name)) {
            throw std::invalid_argument("environment has no physics parameter '" + name + "'");
        }
    }
    params.validate();
    physics_ = std::move(params);
}

Vector Environment::reset(std::uint64_t seed) {
    rng_.seed(seed);
    state_ = initial_state(rng_);
    steps_ = 0;
    done_ = false;
    started_ = true;
    return observe();
}

StepResult Environment::step(const Vector& action) {
    if (!started_) {
        throw std::logic_error(name() + ": step before reset");
    }
    if (done_) {
        throw std::logic_error(name() + ": step after episode end");
    }
    if (!action_space().contains(action)) {
        throw std::invalid_argument(name() + ": action outside the action space");
    }
    ++steps_;
    StepResult r = transition(action);
    done_ = r.done;
    return r;
}

EnvSnapshot Environment::snapshot() const {
    return {name(), state_, steps_, done_, started_, physics_, rng_};
}

void Environment::restore(const EnvSnapshot& snap) {
    if (snap.env_name != name()) {
        throw std::invalid_argument("snapshot of '" + snap.env_name + "' cannot restore " + name());
    }
    if (snap.started && snap.state.size() != state_.size() && state_.size() != 0) {
        throw std::invalid_argument(name() + ": snapshot state has wrong size");
    }
    set_physics(snap.physics);
    state_ = snap.state;
    steps_ = snap.steps;
    done_ = snap.done;
    started_ = snap.started;
    rng_ = snap.rng;
}

// ---------------------------------------------------------------------------
// Chain

namespace {

PhysicsParams chain_physics(const ChainConfig& c) {
    return PhysicsParams{{{"slip_prob", c.slip_prob}}};
}

} // namespace

ChainEnv::ChainEnv(ChainConfig config) : Environment(chain_physics(config)), config_(config) {
    if (config_.start < 1 || config_.start > kPositions - 2) {
        throw std::invalid_argument("chain: start must be an interior position");
    }
    if (!(config_.gamma >= 0.0 && config_.gamma < 1.0)) {
        throw std::invalid_argument("chain: gamma must lie in [0, 1)");
    }
    if (config_.max_steps <= 0 || !std::isfinite(config_.trap_reward)) {
        throw std::invalid_argument("chain: max_steps must be positive and trap_reward finite");
    }
    state_ = Vector::Constant(1, config_.start);
}

double ChainEnv::reward_at(int position) const {
    if (position == 0) {
        return 0.1;
    }
    if (position == kPositions - 1) {
        return 1.0;
    }
    return position == kTrap ? config_.trap_reward : 0.0;
}

Vector ChainEnv::initial_state(std::mt19937_64&) const {
    return Vector::Constant(1, config_.start);
}

StepResult ChainEnv::transition(const Vector& action) {
    const int p = position();
    StepResult r;
    r.reward = reward_at(p);
    if (p == 0 || p == kPositions - 1) {
        r.done = true;
    } else {
        const int dir = action(0) == 0.0 ? -1 : 1;
        const bool slip = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < physics_.at("slip_prob");
        state_(0) = p + (slip ? -dir : dir);
        r.done = steps_ >= config_.max_steps;
    }
    r.observation = observe();
    return r;
}

Vector ChainEnv::observe() const {
    return Vector::Unit(kPositions, position());
}

int ChainEnv::decode(const Vector& observation) {
    if (observation.size() != kPositions) {
        throw std::invalid_argument("chain observation must have 7 entries");
    }
    Eigen::Index best = 0;
    observation.maxCoeff(&best);
    return static_cast<int>(best);
}

TabularMdp ChainEnv::to_tabular() const {
    const int sink = kPositions;
    TabularMdp mdp(kPositions + 1, 2, config_.gamma);
    const double slip = physics_.at("slip_prob");
    for (int s = 0; s < kPositions; ++s) {
        for (int a = 0; a < 2; ++a) {
            mdp.rewards(s, a) = reward_at(s);
            Vector& row = mdp.row(s, a);
            if (s == 0 || s == kPositions - 1) {
                row(sink) = 1.0;
                continue;
            }
            const int dir = a == 0 ? -1 : 1;
            row(s + dir) += 1.0 - slip;
            row(s - dir) += slip;
        }
    }
    mdp.row(sink, 0)(sink) = 1.0;
    mdp.row(sink, 1)(sink) = 1.0;
    mdp.validate();
    return mdp;
}

// ---------------------------------------------------------------------------
// Pendulum

namespace {

PhysicsParams pendulum_physics(const PendulumConfig& c) {
    return PhysicsParams{{{"mass", c.mass}, {"length", c.length}, {"damping", c.damping}, {"gravity", c.gravity}}};
}

} // namespace

double wrap_angle(double theta) {
    constexpr double pi = std::numbers::pi;
    double t = std::fmod(theta + pi, 2.0 * pi);
    if (t < 0.0) {
        t += 2.0 * pi;
    }
    return t - pi;
}

PendulumEnv::PendulumEnv(PendulumConfig config) : Environment(pendulum_physics(config)), config_(config) {
    if (!(config_.dt > 0.0) || !(config_.max_torque > 0.0) || config_.max_steps <= 0) {
        throw std::invalid_argument("pendulum: dt, max_torque and max_steps must be positive");
    }
    state_ = Vector::Zero(2);
}

ActionSpace PendulumEnv::action_space() const {
    return ActionSpace::box(Vector::Constant(1, -config_.max_torque), Vector::Constant(1, config_.max_torque));
}

Vector PendulumEnv::initial_state(std::mt19937_64& rng) const {
    Vector s(2);
    s(0) = std::uniform_real_distribution<double>(-std::numbers::pi, std::numbers::pi)(rng);
    s(1) = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    return s;
}

void PendulumEnv::set_state(double theta, double theta_dot) {
    state_ = Vector(2);
    state_ << theta, theta_dot;
    steps_ = 0;
    done_ = false;
    started_ = true;
}

// Gravity pushes away from upright: theta = 0 is the unstable equilibrium.
double PendulumEnv::angular_acceleration(double theta, double theta_dot, double torque) const {
    const double m = physics_.at("mass");
    const double l = physics_.at("length");
    const double d = physics_.at("damping");
    const double g = physics_.at("gravity");
    return (torque - d * theta_dot + m * g * l * std::sin(theta)) / (m * l * l);
}

double PendulumEnv::energy() const {
    const double m = physics_.at("mass");
    const double l = physics_.at("length");
    const double g = physics_.at("gravity");
    return 0.5 * m * l * l * state_(1) * state_(1) + m * g * l * std::cos(state_(0));
}

StepResult PendulumEnv::transition(const Vector& action) {
    const double tau = action(0);
    const double theta = state_(0);
    const double theta_dot = state_(1);
    StepResult r;
    const double th = wrap_angle(theta);
    r.reward = -(th * th + 0.1 * theta_dot * theta_dot + 0.001 * tau * tau);
    // Stormer-Verlet (kick-drift-kick) on kSubsteps sub-intervals of dt. Single-step
    // semi-implicit Euler at dt = 0.05 swings the energy by ~0.5 per step near the bottom.
    const double h = config_.dt / kSubsteps;
    double th_k = theta;
    double w_k = theta_dot;
    for (int k = 0; k < kSubsteps; ++k) {
        w_k += 0.5 * h * angular_acceleration(th_k, w_k, tau);
        th_k += h * w_k;
        w_k += 0.5 * h * angular_acceleration(th_k, w_k, tau);
    }
    state_(0) = th_k;
    state_(1) = w_k;
    r.done = steps_ >= config_.max_steps;
    r.observation = observe();
    return r;
}

Vector PendulumEnv::observe() const {
    Vector o(3);
    o << std::cos(state_(0)), std::sin(state_(0)), state_(1);
    return o;
}

// ---------------------------------------------------------------------------

std::vector<StepResult> branch_sample(Environment& env, const EnvSnapshot& snapshot, const Vector& action, int n,
                                      std::mt19937_64& rng) {
    if (n <= 0) {
        throw std::invalid_argument("branch_sample: n must be positive");
    }
    if (!snapshot.started || snapshot.done) {
        throw std::invalid_argument("branch_sample: snapshot is not a live episode state");
    }
    std::vector<StepResult> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        env.restore(snapshot);
        if (j > 0) {
            env.reseed(rng());
        }
        out.push_back(env.step(action));
    }
    env.restore(snapshot);
    return out;
}

void apply_physics_scale(Environment& env, const std::map<std::string, double>& scale) {
    PhysicsParams p = env.nominal_params();
    for (const auto& [name, factor] : scale) {
        if (!(factor > 0.0) || !std::isfinite(factor)) {
            throw std::invalid_argument("apply_physics_scale: scale for '" + name + "' must be positive");
        }
        auto it = p.values.find(name);
        if (it == p.values.end()) {
            throw std::invalid_argument("apply_physics_scale: unknown parameter '" + name + "'");
        }
        it->second *= factor;
    }
    env.set_physics(std::move(p));
}

} // namespace drspcrl
