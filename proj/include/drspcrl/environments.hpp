#pragma once

#include "drspcrl/tabular_mdp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace drspcrl {

/// Named physical parameters. Perturbations are always taken relative to a
/// separately stored nominal copy.
struct PhysicsParams {
    std::map<std::string, double> values;

    double at(const std::string& name) const;
    bool operator==(const PhysicsParams&) const = default;

    /// Positive, except slip_prob in [0, 0.5] and damping >= 0.
    void validate() const;
};

struct ActionSpace {
    enum class Kind { Discrete, Box };
    Kind kind = Kind::Discrete;
    int n = 0;   // Discrete: number of actions
    Vector low;  // Box bounds
    Vector high;

    static ActionSpace discrete(int n);
    static ActionSpace box(Vector low, Vector high);

    /// Width of the action vector handed to step(): 1 for Discrete.
    int dim() const { return kind == Kind::Discrete ? 1 : static_cast<int>(low.size()); }
    bool contains(const Vector& action) const;
};

struct StepResult {
    Vector observation;
    double reward = 0.0;
    bool done = false;
};

/// Complete simulator state: restoring it and replaying the same actions
/// reproduces the same trajectory, including the transition noise.
struct EnvSnapshot {
    std::string env_name;
    Vector state;
    int steps = 0;
    bool done = false;
    bool started = false;
    PhysicsParams physics;
    std::mt19937_64 rng;
};

class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string name() const = 0;
    virtual int observation_dim() const = 0;
    virtual ActionSpace action_space() const = 0;
    /// Discount used when scoring episode returns.
    virtual double return_discount() const = 0;
    /// Parameters resampled by environment-noise perturbations.
    virtual std::vector<std::string> perturbed_params() const = 0;
    virtual std::unique_ptr<Environment> clone() const = 0;

    Vector reset(std::uint64_t seed);
    StepResult step(const Vector& action);

    EnvSnapshot snapshot() const;
    void restore(const EnvSnapshot& snap);
    /// Replaces the transition-noise stream without touching the state.
    void reseed(std::uint64_t seed) { rng_.seed(seed); }

    const PhysicsParams& physics() const { return physics_; }
    const PhysicsParams& nominal_params() const { return nominal_; }
    /// Sets the active parameters; the nominal copy is untouched.
    void set_physics(PhysicsParams params);

    bool done() const { return done_; }
    int steps() const { return steps_; }
    const Vector& state() const { return state_; }

protected:
    explicit Environment(PhysicsParams nominal);

    virtual Vector initial_state(std::mt19937_64& rng) const = 0;
    virtual StepResult transition(const Vector& action) = 0;
    virtual Vector observe() const = 0;

    PhysicsParams nominal_;
    PhysicsParams physics_;
    Vector state_;
    int steps_ = 0;
    bool done_ = false;
    bool started_ = false;
    std::mt19937_64 rng_;
};

struct ChainConfig {
    double slip_prob = 0.1;
    double trap_reward = -0.2;
    int start = 3;
    double gamma = 0.95;
    int max_steps = 1000;

    bool operator==(const ChainConfig&) const = default;
};

/// Seven positions 0..6. Positions 0 and 6 are terminals (+0.1 and +1, paid on
/// the exit step); position 5, next to the goal, is a trap. Action 0 moves left,
/// action 1 right; with probability slip_prob the move goes the other way.
class ChainEnv : public Environment {
public:
    static constexpr int kPositions = 7;
    static constexpr int kTrap = 5;

    explicit ChainEnv(ChainConfig config = {});

    std::string name() const override { return "chain"; }
    int observation_dim() const override { return kPositions; }
    ActionSpace action_space() const override { return ActionSpace::discrete(2); }
    double return_discount() const override { return config_.gamma; }
    std::vector<std::string> perturbed_params() const override { return {"slip_prob"}; }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<ChainEnv>(*this); }

    const ChainConfig& config() const { return config_; }
    int position() const { return static_cast<int>(state_(0)); }
    double reward_at(int position) const;

    /// Exact model under the active physics: the seven positions plus an
    /// absorbing zero-reward sink (index 7) entered after a terminal.
    TabularMdp to_tabular() const;

    /// Position encoded by a (possibly noisy) one-hot observation.
    static int decode(const Vector& observation);

protected:
    Vector initial_state(std::mt19937_64& rng) const override;
    StepResult transition(const Vector& action) override;
    Vector observe() const override;

private:
    ChainConfig config_;
};

struct PendulumConfig {
    double mass = 1.0;
    double length = 1.0;
    double damping = 0.1;
    double gravity = 9.81;
    double dt = 0.05;
    double max_torque = 2.0;
    int max_steps = 200;

    bool operator==(const PendulumConfig&) const = default;
};

/// Torque-limited swing-up. theta = 0 is upright; the state is (theta, theta_dot).
class PendulumEnv : public Environment {
public:
    /// Integrator sub-intervals per control step.
    static constexpr int kSubsteps = 10;

    explicit PendulumEnv(PendulumConfig config = {});

    std::string name() const override { return "pendulum"; }
    int observation_dim() const override { return 3; }
    ActionSpace action_space() const override;
    double return_discount() const override { return 1.0; }
    std::vector<std::string> perturbed_params() const override { return {"mass", "damping", "length"}; }
    std::unique_ptr<Environment> clone() const override { return std::make_unique<PendulumEnv>(*this); }

    const PendulumConfig& config() const { return config_; }

    /// Places the pendulum at an exact state (starts an episode).
    void set_state(double theta, double theta_dot);
    double angular_acceleration(double theta, double theta_dot, double torque) const;
    double energy() const;

protected:
    Vector initial_state(std::mt19937_64& rng) const override;
    StepResult transition(const Vector& action) override;
    Vector observe() const override;

private:
    PendulumConfig config_;
};

double wrap_angle(double theta);

/// n next-state draws from the saved state: branch 0 continues the snapshot's
/// own noise stream (so n = 1 is an ordinary step), the rest use sub-seeds drawn
/// from rng. The environment is left restored to the snapshot.
std::vector<StepResult> branch_sample(Environment& env, const EnvSnapshot& snapshot, const Vector& action,
                                      int n, std::mt19937_64& rng);

/// Active physics = nominal * scale, per named parameter (missing names keep scale 1).
void apply_physics_scale(Environment& env, const std::map<std::string, double>& scale);

} // namespace drspcrl
