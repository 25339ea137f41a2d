#include "drspcrl/tabular_mdp.hpp"

#include "json.hpp"

#include <cmath>
#include <sstream>

namespace drspcrl {

TabularMdp::TabularMdp(int states, int actions, double discount)
    : n_states(states), n_actions(actions), gamma(discount), rewards(Matrix::Zero(states, actions)),
      kernel(static_cast<std::size_t>(states * actions), Vector::Zero(states)) {}

void TabularMdp::validate() const {
    if (n_states <= 0 || n_actions <= 0) {
        throw std::invalid_argument("TabularMdp: need at least one state and one action");
    }
    if (!(gamma >= 0.0 && gamma < 1.0)) {
        throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
    }
    if (rewards.rows() != n_states || rewards.cols() != n_actions || !rewards.allFinite()) {
        throw std::invalid_argument("TabularMdp: reward table has wrong shape or non-finite entries");
    }
    if (kernel.size() != static_cast<std::size_t>(n_states * n_actions)) {
        throw std::invalid_argument("TabularMdp: kernel has wrong number of rows");
    }
    for (const auto& r : kernel) {
        if (r.size() != n_states || (r.array() < 0.0).any() || std::abs(r.sum() - 1.0) > 1e-9) {
            throw std::invalid_argument("TabularMdp: kernel row is not a distribution over states");
        }
    }
}

ValueSupport TabularMdp::successor_support(int s, int a, const Vector& values) const {
    const Vector& p = row(s, a);
    int count = 0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        count += p(j) > 0.0 ? 1 : 0;
    }
    ValueSupport out;
    out.values.resize(count);
    out.probs.resize(count);
    int k = 0;
    for (Eigen::Index j = 0; j < p.size(); ++j) {
        if (p(j) > 0.0) {
            out.values(k) = values(j);
            out.probs(k) = p(j);
            ++k;
        }
    }
    // Renormalize away the <= 1e-9 slack the validator tolerates.
    out.probs /= out.probs.sum();
    return out;
}

InnerSolver dual_inner_solver(const DualSolverConfig& config) {
    return [config](const ValueSupport& s, double epsilon) {
        return solve_dual(s, epsilon, config).robust_value;
    };
}

namespace {

void check_values(const TabularMdp& mdp, const Vector& values) {
    if (values.size() != mdp.n_states) {
        throw std::invalid_argument("value vector does not match the number of states");
    }
    if (!values.allFinite()) {
        throw std::invalid_argument("value vector has non-finite entries");
    }
}

Matrix robust_q(const TabularMdp& mdp, const Vector& values, double epsilon,
                const InnerSolver& inner) {
    Matrix q(mdp.n_states, mdp.n_actions);
    // Each (s,a) writes its own slot; order of evaluation does not matter.
    for (int s = 0; s < mdp.n_states; ++s) {
        for (int a = 0; a < mdp.n_actions; ++a) {
            const ValueSupport support = mdp.successor_support(s, a, values);
            const double cont = epsilon == 0.0 ? support.nominal_expectation() : inner(support, epsilon);
            q(s, a) = mdp.rewards(s, a) + mdp.gamma * cont;
        }
    }
    return q;
}

// Stop once the contraction bound guarantees the iterate is within tol of the fixed point.
double stopping_residual(double gamma, double tol) {
    return gamma > 0.0 ? tol * (1.0 - gamma) / gamma : tol;
}

} // namespace

BackupResult robust_bellman_backup(const TabularMdp& mdp, const Vector& values, double epsilon,
                                   const InnerSolver& inner) {
    check_values(mdp, values);
    if (!(epsilon >= 0.0)) {
        throw std::invalid_argument("robust_bellman_backup: epsilon must be nonnegative");
    }
    BackupResult out;
    out.q_values = robust_q(mdp, values, epsilon, inner);
    out.values = out.q_values.rowwise().maxCoeff();
    return out;
}

RobustSolution robust_value_iteration(const TabularMdp& mdp, double epsilon, double tol, int max_iter,
                                      const InnerSolver& inner) {
    mdp.validate();
    if (!(tol > 0.0)) {
        throw std::invalid_argument("robust_value_iteration: tol must be positive");
    }
    const double target = stopping_residual(mdp.gamma, tol);
    RobustSolution sol;
    sol.epsilon = epsilon;
    Vector v = Vector::Zero(mdp.n_states);
    BackupResult b;
    for (int it = 1; it <= max_iter; ++it) {
        b = robust_bellman_backup(mdp, v, epsilon, inner);
        sol.residual = (b.values - v).lpNorm<Eigen::Infinity>();
        v = b.values;
        sol.iterations = it;
        if (sol.residual <= target) {
            break;
        }
    }
    if (sol.residual > target) {
        throw ConvergenceError("robust_value_iteration did not converge; residual " +
                                   std::to_string(sol.residual),
                               sol.residual);
    }
    sol.values = v;
    sol.q_values = robust_q(mdp, v, epsilon, inner);
    sol.policy.resize(static_cast<std::size_t>(mdp.n_states));
    for (int s = 0; s < mdp.n_states; ++s) {
        Eigen::Index best = 0;
        sol.q_values.row(s).maxCoeff(&best); // first maximizer: lowest index wins ties
        sol.policy[static_cast<std::size_t>(s)] = static_cast<int>(best);
    }
    return sol;
}

Vector robust_policy_evaluation(const TabularMdp& mdp, const Matrix& policy, double epsilon, double tol,
                                int max_iter, const InnerSolver& inner) {
    mdp.validate();
    if (policy.rows() != mdp.n_states || policy.cols() != mdp.n_actions) {
        throw std::invalid_argument("robust_policy_evaluation: policy table has wrong shape");
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        if ((policy.row(s).array() < 0.0).any() || std::abs(policy.row(s).sum() - 1.0) > 1e-9) {
            throw std::invalid_argument("robust_policy_evaluation: policy row is not a distribution");
        }
    }
    const double target = stopping_residual(mdp.gamma, tol);
    Vector v = Vector::Zero(mdp.n_states);
    double residual = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const Matrix q = robust_q(mdp, v, epsilon, inner);
        const Vector next = q.cwiseProduct(policy).rowwise().sum();
        residual = (next - v).lpNorm<Eigen::Infinity>();
        v = next;
        if (residual <= target) {
            return v;
        }
    }
    throw ConvergenceError("robust_policy_evaluation did not converge; residual " + std::to_string(residual),
                           residual);
}

Vector robust_policy_evaluation(const TabularMdp& mdp, const std::vector<int>& policy, double epsilon,
                                double tol, int max_iter, const InnerSolver& inner) {
    return robust_policy_evaluation(mdp, deterministic_policy_table(policy, mdp.n_actions), epsilon, tol,
                                    max_iter, inner);
}

Matrix deterministic_policy_table(const std::vector<int>& policy, int n_actions) {
    Matrix table = Matrix::Zero(static_cast<Eigen::Index>(policy.size()), n_actions);
    for (std::size_t s = 0; s < policy.size(); ++s) {
        if (policy[s] < 0 || policy[s] >= n_actions) {
            throw std::invalid_argument("deterministic policy action out of range");
        }
        table(static_cast<Eigen::Index>(s), policy[s]) = 1.0;
    }
    return table;
}

Matrix mix_with_uniform(const Matrix& policy, double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("mix_with_uniform: p must lie in [0, 1]");
    }
    const double u = 1.0 / static_cast<double>(policy.cols());
    return (1.0 - p) * policy + Matrix::Constant(policy.rows(), policy.cols(), p * u);
}

std::string to_json(const TabularMdp& mdp) {
    nlohmann::json j;
    j["n_states"] = mdp.n_states;
    j["n_actions"] = mdp.n_actions;
    j["gamma"] = mdp.gamma;
    auto& rewards = j["rewards"] = nlohmann::json::array();
    auto& kernel = j["kernel"] = nlohmann::json::array();
    for (int s = 0; s < mdp.n_states; ++s) {
        auto r = nlohmann::json::array();
        auto k = nlohmann::json::array();
        for (int a = 0; a < mdp.n_actions; ++a) {
            r.push_back(mdp.rewards(s, a));
            k.push_back(std::vector<double>(mdp.row(s, a).data(), mdp.row(s, a).data() + mdp.n_states));
        }
        rewards.push_back(std::move(r));
        kernel.push_back(std::move(k));
    }
    return j.dump(2);
}

TabularMdp tabular_mdp_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text, nullptr, true, true);
    for (const auto& [key, _] : j.items()) {
        if (key != "n_states" && key != "n_actions" && key != "gamma" && key != "rewards" && key != "kernel") {
            throw std::invalid_argument("TabularMdp json: unknown key '" + key + "'");
        }
    }
    TabularMdp mdp(j.at("n_states").get<int>(), j.at("n_actions").get<int>(), j.at("gamma").get<double>());
    const auto& rewards = j.at("rewards");
    const auto& kernel = j.at("kernel");
    if (rewards.size() != static_cast<std::size_t>(mdp.n_states) ||
        kernel.size() != static_cast<std::size_t>(mdp.n_states)) {
        throw std::invalid_argument("TabularMdp json: rewards/kernel must have n_states rows");
    }
    for (int s = 0; s < mdp.n_states; ++s) {
        if (rewards[s].size() != static_cast<std::size_t>(mdp.n_actions) ||
            kernel[s].size() != static_cast<std::size_t>(mdp.n_actions)) {
            throw std::invalid_argument("TabularMdp json: each state needs n_actions entries");
        }
        for (int a = 0; a < mdp.n_actions; ++a) {
            mdp.rewards(s, a) = rewards[s][a].get<double>();
            const auto row = kernel[s][a].get<std::vector<double>>();
            if (row.size() != static_cast<std::size_t>(mdp.n_states)) {
                throw std::invalid_argument("TabularMdp json: kernel row has wrong length");
            }
            mdp.row(s, a) = Eigen::Map<const Vector>(row.data(), mdp.n_states);
        }
    }
    mdp.validate();
    return mdp;
}

} // namespace drspcrl
