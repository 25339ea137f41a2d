#include "drspcrl/agent.hpp"
#include "drspcrl/tabular_mdp.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

using namespace drspcrl;

namespace {

Matrix randn(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    return Matrix::NullaryExpr(r, c, [&]() { return n(rng); });
}

std::vector<Vector> random_branches(int batch, int n, std::mt19937_64& rng) {
    std::vector<Vector> out;
    for (int i = 0; i < batch; ++i) {
        out.push_back(randn(n, 1, rng, 2.0));
    }
    return out;
}

std::unique_ptr<Trainer> chain_trainer(SchedulerConfig sched, std::uint64_t seed, int rollout = 256) {
    TrainConfig cfg;
    cfg.kind = "tabular";
    cfg.rollout_steps = rollout;
    return make_trainer(cfg, std::make_unique<ChainEnv>(), Scheduler(sched, CurriculumState::start(0, 1, 1, 0.01)),
                        seed);
}

std::unique_ptr<Trainer> pendulum_trainer(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.kind = "network";
    cfg.rollout_steps = 128;
    cfg.minibatches = 4;
    cfg.epochs = 2;
    cfg.hidden_dims = {16, 16};
    cfg.dual_hidden_dims = {16};
    return make_trainer(cfg, std::make_unique<PendulumEnv>(),
                        Scheduler(DrSpcrlSchedule{}, CurriculumState::start(0, 1, 1, 0.01)), seed);
}

std::unique_ptr<Trainer> chain_network_trainer(std::uint64_t seed) {
    TrainConfig cfg;
    cfg.kind = "network";
    cfg.rollout_steps = 128;
    cfg.minibatches = 4;
    cfg.epochs = 2;
    cfg.hidden_dims = {16};
    cfg.dual_hidden_dims = {16};
    return make_trainer(cfg, std::make_unique<ChainEnv>(),
                        Scheduler(DrSpcrlSchedule{}, CurriculumState::start(0, 1, 1, 0.01)), seed);
}

void check_same(const MetricsRow& a, const MetricsRow& b) {
    CHECK(a.iteration == b.iteration);
    CHECK(a.env_steps == b.env_steps);
    CHECK((a.mean_episode_return == b.mean_episode_return ||
           (std::isnan(a.mean_episode_return) && std::isnan(b.mean_episode_return))));
    CHECK(a.robust_value_estimate == b.robust_value_estimate);
    CHECK(a.epsilon == b.epsilon);
    CHECK(a.beta_estimate == b.beta_estimate);
    CHECK(a.policy_loss == b.policy_loss);
    CHECK(a.dual_loss == b.dual_loss);
}

} // namespace

TEST_CASE("robust targets") {
    std::mt19937_64 rng(0);
    SUBCASE("zero budget and one branch is the TD target") {
        const Vector r = Vector::LinSpaced(3, 0.0, 1.0);
        const std::vector<Vector> next{Vector::Constant(1, 2.0), Vector::Constant(1, -1.0), Vector::Constant(1, 5.0)};
        const Vector y = robust_target(next, Vector::Constant(3, 0.7), 0.0, r, {false, false, true}, 0.9);
        CHECK(y(0) == doctest::Approx(0.0 + 0.9 * 2.0));
        CHECK(y(1) == doctest::Approx(0.5 - 0.9));
        CHECK(y(2) == 1.0);
    }
    SUBCASE("constant branches") {
        const std::vector<Vector> next{Vector::Constant(4, 3.0)};
        const Vector y = robust_target(next, Vector::Constant(1, 2.0), 0.1, Vector::Constant(1, 1.0), {false}, 0.9);
        CHECK(y(0) == doctest::Approx(1.0 + 0.9 * (3.0 - 0.2)));
    }
    SUBCASE("agrees with the dual objective at fixed beta") {
        for (int k = 0; k < 20; ++k) {
            const Vector v = randn(4, 1, rng);
            const ValueSupport s(v, Vector::Constant(4, 0.25));
            CHECK(std::abs(robust_branch_value(v, 1.0, 0.1) - dual_objective(1.0, s, 0.1)) <= 1e-9);
        }
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(robust_target({}, Vector::Ones(1), 0.1, Vector::Ones(1), {false}, 0.9), std::invalid_argument);
        CHECK_THROWS_AS(robust_branch_value(Vector(), 1.0, 0.1), std::invalid_argument);
    }
}

TEST_CASE("generalized advantages") {
    Vector y(3);
    y << 1.0, 2.0, 0.5;
    const Vector v = Vector::Zero(3);
    const Vector a = gae_advantages(y, v, {false, true, false}, 0.9, 0.5);
    CHECK(a(2) == doctest::Approx(0.5));
    CHECK(a(1) == doctest::Approx(2.0));
    CHECK(a(0) == doctest::Approx(1.0 + 0.45 * 2.0));
    Vector x(4);
    x << 1.0, 2.0, 3.0, 4.0;
    normalize_in_place(x);
    CHECK(x.mean() == doctest::Approx(0.0));
    CHECK(std::sqrt(x.squaredNorm() / 4.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("dual network updates") {
    std::mt19937_64 rng(1);
    const int batch = 16;
    SUBCASE("zero budget pushes beta up") {
        DualNetwork dual(MlpSpec{3, {8}, 1}, 1e-3, rng);
        const Matrix inputs = randn(3, batch, rng);
        const auto branches = random_branches(batch, 4, rng);
        Adam opt(dual.net.num_params(), 5e-4);
        double prev = estimate_beta_star(dual, inputs);
        for (int round = 0; round < 10; ++round) {
            std::vector<int> all(batch);
            std::iota(all.begin(), all.end(), 0);
            dual_update(dual, opt, inputs, branches, 0.0, 5, {all});
            const double now = estimate_beta_star(dual, inputs);
            CHECK(now >= prev);
            prev = now;
        }
    }
    SUBCASE("constant branches drive beta to the floor") {
        DualNetwork dual(MlpSpec{3, {8}, 1}, 1e-3, rng);
        const Matrix inputs = randn(3, batch, rng);
        const std::vector<Vector> branches(batch, Vector::Constant(4, 1.5));
        std::vector<int> all(batch);
        std::iota(all.begin(), all.end(), 0);
        Adam opt(dual.net.num_params(), 5e-2);
        const double before = estimate_beta_star(dual, inputs);
        dual_update(dual, opt, inputs, branches, 0.5, 400, {all});
        const double after = estimate_beta_star(dual, inputs);
        CHECK(after < before);
        CHECK(after < 0.05);
        CHECK((dual.beta(inputs).array() >= 1e-3).all());
    }
    SUBCASE("K updates reduce the loss monotonically in most trials") {
        int monotone = 0;
        const int trials = 50;
        for (int t = 0; t < trials; ++t) {
            DualNetwork dual(MlpSpec{3, {8}, 1}, 1e-3, rng);
            const Matrix inputs = randn(3, 8, rng);
            const auto branches = random_branches(8, 4, rng);
            std::vector<int> all(8);
            std::iota(all.begin(), all.end(), 0);
            Adam opt(dual.net.num_params(), 5e-4);
            const DualUpdateResult r = dual_update(dual, opt, inputs, branches, 0.1, 5, {all});
            std::vector<double> seq = r.losses;
            seq.push_back(dual.loss_and_grad(inputs, branches, 0.1, nullptr));
            bool ok = true;
            for (std::size_t k = 1; k < seq.size(); ++k) {
                ok = ok && seq[k] <= seq[k - 1];
            }
            monotone += ok ? 1 : 0;
        }
        CHECK(monotone >= 45);
    }
    SUBCASE("beta estimate") {
        DualNetwork dual(MlpSpec{2, {4}, 1}, 1e-3, rng);
        Vector p = Vector::Zero(dual.net.num_params());
        p(p.size() - 1) = std::log(std::expm1(0.7));
        dual.net.set_parameters(p);
        CHECK(estimate_beta_star(dual, randn(2, 5, rng)) == doctest::Approx(0.7 + 1e-3));
        DualNetwork other(MlpSpec{2, {4}, 1}, 1e-3, rng);
        const Matrix one = randn(2, 1, rng);
        CHECK(estimate_beta_star(other, one) == other.beta(one)(0));
        CHECK_THROWS_AS(estimate_beta_star(other, Matrix(2, 0)), std::invalid_argument);
    }
}

TEST_CASE("policy surrogate") {
    std::mt19937_64 rng(2);
    PolicyNetwork pol(MlpSpec{3, {8}, 2}, ActionSpace::discrete(2), rng);
    const Matrix obs = randn(3, 6, rng);
    Matrix acts(1, 6);
    acts << 0, 1, 1, 0, 1, 0;
    const Vector old = pol.log_prob(obs, acts);
    Vector grad;
    ppo_policy_loss(pol, obs, acts, old, Vector::Zero(6), 0.2, 0.0, &grad);
    CHECK(grad.isZero());

    const Matrix o1 = obs.col(0);
    const Matrix a1 = acts.col(0);
    const Vector old1 = pol.log_prob(o1, a1);
    ppo_policy_loss(pol, o1, a1, old1, Vector::Constant(1, 1.0), 0.2, 0.0, &grad);
    PolicyNetwork stepped = pol;
    stepped.set_parameters(pol.parameters() - 0.5 * grad);
    CHECK(stepped.log_prob(o1, a1)(0) > old1(0));
}

TEST_CASE("gaussian policy actions") {
    std::mt19937_64 rng(3);
    PolicyNetwork pol(MlpSpec{3, {8}, 1}, ActionSpace::box(Vector::Constant(1, -2.0), Vector::Constant(1, 2.0)), rng);
    CHECK(pol.log_std.isZero());
    const Vector o = randn(3, 1, rng);
    CHECK(std::abs(pol.mode(o)(0)) <= 2.0);
    for (int k = 0; k < 100; ++k) {
        CHECK(pol.space.contains(pol.executable(pol.sample(o, rng))));
    }
    const Vector f = action_features(ActionSpace::discrete(3), Vector::Constant(1, 2.0));
    CHECK(f == Vector::Unit(3, 2));
}

TEST_CASE("tabular trainer at zero budget finds the nominal greedy policy") {
    auto trainer = chain_trainer(FixedSchedule{0.0}, 0);
    for (int i = 0; i < 500; ++i) {
        trainer->train_iteration();
    }
    const auto& tab = dynamic_cast<const TabularTrainer&>(*trainer);
    const RobustSolution vi = robust_value_iteration(tab.model(), 0.0, 1e-10);
    const Matrix pi = tab.policy_table();
    for (int s = 1; s < ChainEnv::kPositions - 1; ++s) {
        Eigen::Index greedy = 0;
        pi.row(s).maxCoeff(&greedy);
        CHECK(greedy == vi.policy[static_cast<std::size_t>(s)]);
    }
    CHECK(trainer->scheduler().epsilon() == 0.0);
}

TEST_CASE("tabular beta estimate skips unattained duals") {
    auto trainer = chain_trainer(DrSpcrlSchedule{}, 0);
    const auto& tab = dynamic_cast<const TabularTrainer&>(*trainer);
    CHECK(tab.mean_beta_star({3, 4}, {0, 1}, 0.0) == 0.0);
    CHECK(tab.mean_beta_star({}, {}, 0.5) == 0.0);
}

TEST_CASE("metrics rows are deterministic per seed") {
    auto a = chain_trainer(DrSpcrlSchedule{}, 7);
    auto b = chain_trainer(DrSpcrlSchedule{}, 7);
    for (int i = 0; i < 3; ++i) {
        check_same(a->train_iteration(), b->train_iteration());
    }
    auto p = pendulum_trainer(7);
    auto q = pendulum_trainer(7);
    check_same(p->train_iteration(), q->train_iteration());
    const MetricsRow r = chain_network_trainer(3)->train_iteration();
    CHECK(r.iteration == 1);
    CHECK(r.env_steps == 128);
    CHECK(std::isfinite(r.beta_estimate));
}

TEST_CASE("checkpoint round trip continues identically") {
    for (int kind = 0; kind < 3; ++kind) {
        auto make = [kind]() {
            return kind == 0 ? chain_trainer(RegretBufferSchedule{5, 0.5, 0.01, 0.05, 1}, 11)
                   : kind == 1 ? pendulum_trainer(11)
                               : chain_network_trainer(11);
        };
        auto a = make();
        for (int i = 0; i < 2; ++i) {
            a->train_iteration();
        }
        const nlohmann::json saved = a->save();
        auto b = make();
        b->load(nlohmann::json::parse(saved.dump()));
        CHECK(b->iteration() == 2);
        for (int i = 0; i < 2; ++i) {
            check_same(a->train_iteration(), b->train_iteration());
        }
        CHECK(a->save() == b->save());
    }
}

TEST_CASE("train config validation") {
    TrainConfig c;
    CHECK_NOTHROW(c.validate());
    c.kind = "bogus";
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.rollout_steps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = TrainConfig{};
    c.kind = "tabular";
    CHECK_THROWS(make_trainer(c, std::make_unique<PendulumEnv>(),
                              Scheduler(DrSpcrlSchedule{}, CurriculumState::start(0, 1, 1, 0.01)), 0));
}
