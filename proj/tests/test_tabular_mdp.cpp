#include "drspcrl/environments.hpp"
#include "drspcrl/tabular_mdp.hpp"

#include "doctest.h"

#include <Eigen/LU>

#include <random>

using namespace drspcrl;

namespace {

TabularMdp random_chain(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TabularMdp mdp(n, 2, 0.9);
    for (int s = 0; s < n; ++s) {
        for (int a = 0; a < 2; ++a) {
            Vector row = Vector::Zero(n);
            const int ahead = std::min(n - 1, s + 1);
            const int back = std::max(0, s - 1);
            const double stay = 0.1 + 0.2 * u(rng);
            row(s) += stay;
            row(a == 1 ? ahead : back) += (1.0 - stay) * 0.8;
            row(a == 1 ? back : ahead) += (1.0 - stay) * 0.2;
            mdp.row(s, a) = row;
            mdp.rewards(s, a) = s == n - 1 ? 1.0 : 0.1 * u(rng);
        }
    }
    return mdp;
}

} // namespace

TEST_CASE("zero budget backup is the nominal Bellman backup") {
    const TabularMdp mdp = random_chain(4, 1);
    const Vector v = Vector::LinSpaced(4, -1.0, 2.0);
    const BackupResult b = robust_bellman_backup(mdp, v, 0.0);
    for (int s = 0; s < 4; ++s) {
        for (int a = 0; a < 2; ++a) {
            CHECK(b.q_values(s, a) == doctest::Approx(mdp.rewards(s, a) + mdp.gamma * mdp.row(s, a).dot(v)));
        }
    }
}

TEST_CASE("self loop fixed point ignores the budget") {
    TabularMdp mdp(1, 1, 0.9);
    mdp.rewards(0, 0) = 1.0;
    mdp.row(0, 0) = Vector::Ones(1);
    for (double eps : {0.0, 0.3, 5.0}) {
        CHECK(robust_value_iteration(mdp, eps, 1e-12).values(0) == doctest::Approx(10.0).epsilon(1e-10));
    }
}

TEST_CASE("backup with the oracle matches the dual backup on a 3-state chain") {
    const TabularMdp mdp = random_chain(3, 2);
    const Vector v = Vector::LinSpaced(3, 0.0, 3.0);
    const InnerSolver oracle = [](const ValueSupport& s, double eps) { return brute_force_inner_min(s, eps, 1e-3); };
    const BackupResult exact = robust_bellman_backup(mdp, v, 0.1);
    const BackupResult brute = robust_bellman_backup(mdp, v, 0.1, oracle);
    CHECK((exact.q_values - brute.q_values).cwiseAbs().maxCoeff() <= 1e-2);
}

TEST_CASE("deterministic kernels admit no perturbation") {
    TabularMdp mdp(3, 2, 0.8);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) {
            mdp.row(s, a) = Vector::Unit(3, (s + a + 1) % 3);
            mdp.rewards(s, a) = 0.3 * s - 0.2 * a;
        }
    }
    const Vector nominal = robust_value_iteration(mdp, 0.0, 1e-12).values;
    CHECK(robust_value_iteration(mdp, 0.7, 1e-12).values.isApprox(nominal, 1e-10));
}

TEST_CASE("robust values shrink as the budget grows") {
    const TabularMdp mdp = random_chain(5, 3);
    const RobustSolution lo = robust_value_iteration(mdp, 0.1, 1e-10);
    const RobustSolution hi = robust_value_iteration(mdp, 0.5, 1e-10);
    const RobustSolution nominal = robust_value_iteration(mdp, 0.0, 1e-10);
    CHECK((hi.values.array() <= lo.values.array() + 1e-12).all());
    CHECK((lo.values.array() <= nominal.values.array() + 1e-12).all());
    CHECK(hi.residual <= 1e-10 * (1.0 - mdp.gamma) / mdp.gamma);
}

TEST_CASE("policy evaluation consistency") {
    const TabularMdp mdp = random_chain(4, 4);
    const RobustSolution sol = robust_value_iteration(mdp, 0.3, 1e-10);
    const Vector v = robust_policy_evaluation(mdp, sol.policy, 0.3, 1e-10);
    CHECK((v - sol.values).cwiseAbs().maxCoeff() <= 2e-10 * 10);

    // Single action, no budget: linear solve.
    TabularMdp one(3, 1, 0.7);
    for (int s = 0; s < 3; ++s) {
        one.rewards(s, 0) = s + 1.0;
        one.row(s, 0) = Vector::Constant(3, 1.0 / 3.0);
    }
    Matrix p(3, 3);
    for (int s = 0; s < 3; ++s) {
        p.row(s) = one.row(s, 0).transpose();
    }
    const Vector linear = (Matrix::Identity(3, 3) - 0.7 * p).partialPivLu().solve(one.rewards.col(0));
    CHECK(robust_policy_evaluation(one, std::vector<int>{0, 0, 0}, 0.0, 1e-13).isApprox(linear, 1e-10));
}

TEST_CASE("ties go to the lowest action index") {
    TabularMdp mdp(2, 3, 0.5);
    for (int s = 0; s < 2; ++s) {
        for (int a = 0; a < 3; ++a) {
            mdp.rewards(s, a) = 1.0;
            mdp.row(s, a) = Vector::Constant(2, 0.5);
        }
    }
    const RobustSolution sol = robust_value_iteration(mdp, 0.2);
    CHECK(sol.policy == std::vector<int>{0, 0});
}

TEST_CASE("chain model: robust-greedy beats nominal-greedy under the budget") {
    const ChainEnv env;
    const TabularMdp mdp = env.to_tabular();
    const RobustSolution nominal = robust_value_iteration(mdp, 0.0, 1e-10);
    for (double eps : {0.5, 1.0}) {
        const RobustSolution robust = robust_value_iteration(mdp, eps, 1e-10);
        const Vector nominal_pi = robust_policy_evaluation(mdp, nominal.policy, eps, 1e-10);
        const Vector robust_pi = robust_policy_evaluation(mdp, robust.policy, eps, 1e-10);
        CHECK((robust_pi.array() >= nominal_pi.array() - 1e-9).all());
    }
    // At eps = 1 the robust policy retreats to the safe end from the left half of the chain.
    const RobustSolution robust = robust_value_iteration(mdp, 1.0, 1e-10);
    CHECK(nominal.policy == std::vector<int>{0, 1, 1, 1, 1, 1, 0, 0});
    CHECK(robust.policy == std::vector<int>{0, 0, 0, 1, 1, 1, 0, 0});
    const Vector nominal_pi = robust_policy_evaluation(mdp, nominal.policy, 1.0, 1e-10);
    const Vector robust_pi = robust_policy_evaluation(mdp, robust.policy, 1.0, 1e-10);
    CHECK(robust_pi(3) > nominal_pi(3) + 0.02);
}

TEST_CASE("mixing and one-hot tables") {
    const Matrix det = deterministic_policy_table({1, 0}, 2);
    CHECK(det(0, 1) == 1.0);
    CHECK(det(1, 0) == 1.0);
    const Matrix mixed = mix_with_uniform(det, 0.4);
    CHECK(mixed(0, 1) == doctest::Approx(0.8));
    CHECK(mixed(0, 0) == doctest::Approx(0.2));
    CHECK_THROWS_AS(mix_with_uniform(det, 1.5), std::invalid_argument);
}

TEST_CASE("json round trip and validation") {
    const TabularMdp mdp = random_chain(3, 5);
    const TabularMdp back = tabular_mdp_from_json(to_json(mdp));
    CHECK(back.n_states == 3);
    CHECK(back.gamma == mdp.gamma);
    CHECK(back.rewards == mdp.rewards);
    for (int s = 0; s < 3; ++s) {
        for (int a = 0; a < 2; ++a) {
            CHECK(back.row(s, a) == mdp.row(s, a));
        }
    }
    CHECK_THROWS(tabular_mdp_from_json(R"({"n_states":1,"n_actions":1,"gamma":0.9,"rewards":[[0]],"kernel":[[[0.5]]]})"));
    CHECK_THROWS(tabular_mdp_from_json(R"({"n_states":1,"n_actions":1,"gamma":1.0,"rewards":[[0]],"kernel":[[[1]]]})"));
    CHECK_THROWS(tabular_mdp_from_json(R"({"n_states":1,"n_actions":1,"gamma":0.5,"rewards":[[0]],"kernel":[[[1]]],"x":1})"));
    CHECK_NOTHROW(tabular_mdp_from_json(R"({"n_states":1,"n_actions":1,"gamma":0.5,"rewards":[[0]],"kernel":[[[1]]]})"));
}
