#pragma once

#include "drspcrl/robust_core.hpp"

#include <Eigen/Core>

#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace drspcrl {

using Matrix = Eigen::MatrixXd;

/// Finite MDP with an (s,a)-rectangular KL uncertainty set around `kernel`.
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.9;
    /// rewards(s, a)
    Matrix rewards;
    /// kernel[s * n_actions + a] is the nominal next-state distribution.
    std::vector<Vector> kernel;

    TabularMdp() = default;
    TabularMdp(int states, int actions, double discount);

    const Vector& row(int s, int a) const { return kernel[static_cast<std::size_t>(s * n_actions + a)]; }
    Vector& row(int s, int a) { return kernel[static_cast<std::size_t>(s * n_actions + a)]; }

    void validate() const;

    /// Successor support of (s,a) under the value function `values`; zero-probability
    /// states are dropped.
    ValueSupport successor_support(int s, int a, const Vector& values) const;
};

struct RobustSolution {
    Vector values;
    Matrix q_values;
    std::vector<int> policy;
    double epsilon = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

/// Inner robust expectation used by the Bellman operators. Swappable so the
/// brute-force oracle can stand in for the dual solver in tests.
using InnerSolver = std::function<double(const ValueSupport&, double epsilon)>;

InnerSolver dual_inner_solver(const DualSolverConfig& config = {});

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

struct BackupResult {
    Vector values;
    Matrix q_values;
};

BackupResult robust_bellman_backup(const TabularMdp& mdp, const Vector& values, double epsilon,
                                   const InnerSolver& inner = dual_inner_solver());

RobustSolution robust_value_iteration(const TabularMdp& mdp, double epsilon, double tol = 1e-8,
                                      int max_iter = 10000,
                                      const InnerSolver& inner = dual_inner_solver());

/// Robust evaluation of a stochastic policy, policy(s, a) = pi(a|s).
Vector robust_policy_evaluation(const TabularMdp& mdp, const Matrix& policy, double epsilon,
                                double tol = 1e-8, int max_iter = 100000,
                                const InnerSolver& inner = dual_inner_solver());

Vector robust_policy_evaluation(const TabularMdp& mdp, const std::vector<int>& policy,
                                double epsilon, double tol = 1e-8, int max_iter = 100000,
                                const InnerSolver& inner = dual_inner_solver());

/// One-hot policy table from a deterministic policy.
Matrix deterministic_policy_table(const std::vector<int>& policy, int n_actions);

/// Mixes a policy with the uniform distribution: (1 - p) pi + p U.
Matrix mix_with_uniform(const Matrix& policy, double p);

// Structured text (JSON) serialization; schema documented in README.
std::string to_json(const TabularMdp& mdp);
TabularMdp tabular_mdp_from_json(const std::string& text);

} // namespace drspcrl
