#pragma once

#include "drspcrl/environments.hpp"
#include "drspcrl/policy.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace drspcrl {

enum class PerturbationKind { None, Observation, Action, Environment };

std::string to_string(PerturbationKind kind);
PerturbationKind perturbation_kind_from_string(const std::string& name);

/// One perturbation kind at one level: sigma_obs, p_act or delta_env.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::None;
    double level = 0.0;

    void validate() const;
};

struct EvalReport {
    PerturbationSpec spec;
    int episodes = 0;
    double mean_return = 0.0;
    double std_error = 0.0;
    double ci95_low = 0.0;
    double ci95_high = 0.0;
    std::uint64_t seed = 0;
    std::vector<double> per_episode_returns;
};

/// obs + N(0, sigma^2 I).
Vector perturb_observation(const Vector& observation, double sigma_obs, std::mt19937_64& rng);

/// With probability p_act, a uniform draw from the action space replaces the action.
Vector perturb_action(const Vector& action, double p_act, const ActionSpace& space, std::mt19937_64& rng);

/// Each named parameter multiplied by an independent U(1 - delta, 1 + delta) draw.
PhysicsParams perturb_physics(const PhysicsParams& nominal, const std::vector<std::string>& names,
                              double delta_env, std::mt19937_64& rng);

/// Seed of episode i; independent of the perturbation so that levels are paired.
std::uint64_t episode_seed(std::uint64_t master_seed, int episode);

/// Runs `episodes` episodes, each with its own env, policy and perturbation streams.
/// Returns are discounted with the environment's return_discount().
EvalReport evaluate_policy(const Policy& policy, const Environment& env, const PerturbationSpec& spec,
                           int episodes, std::uint64_t master_seed);

EvalReport summarize(const PerturbationSpec& spec, std::vector<double> returns, std::uint64_t seed);

} // namespace drspcrl
