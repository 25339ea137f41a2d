#include "drspcrl/eval_harness.hpp"
#include "drspcrl/seeding.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace drspcrl {

std::string to_string(PerturbationKind kind) {
    switch (kind) {
    case PerturbationKind::None:
        return "none";
    case PerturbationKind::Observation:
        return "observation";
    case PerturbationKind::Action:
        return "action";
    case PerturbationKind::Environment:
        return "environment";
    }
    return "none";
}

PerturbationKind perturbation_kind_from_string(const std::string& name) {
    if (name == "none") {
        return PerturbationKind::None;
    }
    if (name == "observation") {
        return PerturbationKind::Observation;
    }
    if (name == "action") {
        return PerturbationKind::Action;
    }
    if (name == "environment") {
        return PerturbationKind::Environment;
    }
    throw std::invalid_argument("unknown perturbation kind '" + name +
                                "' (expected observation, action or environment)");
}

void PerturbationSpec::validate() const {
    switch (kind) {
    case PerturbationKind::None:
        return;
    case PerturbationKind::Observation:
        if (!(level >= 0.0) || !std::isfinite(level)) {
            throw std::invalid_argument("observation noise sigma must be >= 0");
        }
        return;
    case PerturbationKind::Action:
        if (!(level >= 0.0 && level <= 1.0)) {
            throw std::invalid_argument("action noise probability must lie in [0, 1]");
        }
        return;
    case PerturbationKind::Environment:
        if (!(level >= 0.0 && level < 1.0)) {
            throw std::invalid_argument("environment noise delta must lie in [0, 1)");
        }
        return;
    }
}

Vector perturb_observation(const Vector& observation, double sigma_obs, std::mt19937_64& rng) {
    if (!(sigma_obs >= 0.0)) {
        throw std::invalid_argument("perturb_observation: sigma must be nonnegative");
    }
    if (sigma_obs == 0.0) {
        return observation;
    }
    std::normal_distribution<double> normal(0.0, sigma_obs);
    Vector out = observation;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) += normal(rng);
    }
    return out;
}

Vector perturb_action(const Vector& action, double p_act, const ActionSpace& space, std::mt19937_64& rng) {
    if (!(p_act >= 0.0 && p_act <= 1.0)) {
        throw std::invalid_argument("perturb_action: probability must lie in [0, 1]");
    }
    if (p_act == 0.0) {
        return action;
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) >= p_act) {
        return action;
    }
    if (space.kind == ActionSpace::Kind::Discrete) {
        return Vector::Constant(1, static_cast<double>(std::uniform_int_distribution<int>(0, space.n - 1)(rng)));
    }
    Vector out(space.low.size());
    for (Eigen::Index i = 0; i < out.size(); ++i) {
        out(i) = std::uniform_real_distribution<double>(space.low(i), space.high(i))(rng);
    }
    return out;
}

PhysicsParams perturb_physics(const PhysicsParams& nominal, const std::vector<std::string>& names,
                              double delta_env, std::mt19937_64& rng) {
    if (!(delta_env >= 0.0 && delta_env < 1.0)) {
        throw std::invalid_argument("perturb_physics: delta must lie in [0, 1)");
    }
    PhysicsParams out = nominal;
    if (delta_env == 0.0) {
        return out;
    }
    std::uniform_real_distribution<double> scale(1.0 - delta_env, 1.0 + delta_env);
    for (const auto& name : names) {
        out.values.at(name) = nominal.at(name) * scale(rng);
    }
    return out;
}

std::uint64_t episode_seed(std::uint64_t master_seed, int episode) {
    return derive_seed(master_seed, static_cast<std::uint64_t>(episode));
}

EvalReport summarize(const PerturbationSpec& spec, std::vector<double> returns, std::uint64_t seed) {
    EvalReport r;
    r.spec = spec;
    r.seed = seed;
    r.episodes = static_cast<int>(returns.size());
    const double n = static_cast<double>(returns.size());
    r.mean_return = std::accumulate(returns.begin(), returns.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : returns) {
        ss += (x - r.mean_return) * (x - r.mean_return);
    }
    r.std_error = n > 1.0 ? std::sqrt(ss / (n - 1.0)) / std::sqrt(n) : 0.0;
    r.ci95_low = r.mean_return - 1.96 * r.std_error;
    r.ci95_high = r.mean_return + 1.96 * r.std_error;
    r.per_episode_returns = std::move(returns);
    return r;
}

EvalReport evaluate_policy(const Policy& policy, const Environment& prototype, const PerturbationSpec& spec,
                           int episodes, std::uint64_t master_seed) {
    spec.validate();
    if (episodes < 2) {
        throw std::invalid_argument("evaluate_policy: need at least 2 episodes");
    }
    const auto env = prototype.clone();
    const PhysicsParams nominal = env->nominal_params();
    const ActionSpace space = env->action_space();
    const double discount = env->return_discount();
    std::vector<double> returns(static_cast<std::size_t>(episodes));
    for (int i = 0; i < episodes; ++i) {
        const std::uint64_t seed = episode_seed(master_seed, i);
        std::mt19937_64 policy_rng(derive_seed(seed, 0, kPolicyStream));
        std::mt19937_64 perturb_rng(derive_seed(seed, 0, kPerturbStream));
        try {
            env->set_physics(spec.kind == PerturbationKind::Environment
                                 ? perturb_physics(nominal, env->perturbed_params(), spec.level, perturb_rng)
                                 : nominal);
            Vector obs = env->reset(derive_seed(seed, 0, kEnvStream));
            double total = 0.0;
            double weight = 1.0;
            for (;;) {
                if (spec.kind == PerturbationKind::Observation) {
                    obs = perturb_observation(obs, spec.level, perturb_rng);
                }
                Vector action = policy.act(obs, policy_rng);
                if (spec.kind == PerturbationKind::Action) {
                    action = perturb_action(action, spec.level, space, perturb_rng);
                }
                const StepResult r = env->step(action);
                total += weight * r.reward;
                weight *= discount;
                if (r.done) {
                    break;
                }
                obs = r.observation;
            }
            returns[static_cast<std::size_t>(i)] = total;
        } catch (const std::exception& e) {
            throw std::runtime_error("evaluation episode " + std::to_string(i) + " (seed " + std::to_string(seed) +
                                     ") failed: " + e.what());
        }
    }
    return summarize(spec, std::move(returns), master_seed);
}

} // namespace drspcrl
