#include "drspcrl/environments.hpp"
#include "drspcrl/seeding.hpp"

#include "doctest.h"

#include <cmath>
#include <random>

using namespace drspcrl;

namespace {

Vector act(double a) {
    return Vector::Constant(1, a);
}

PendulumEnv frictionless() {
    PendulumConfig c;
    c.damping = 0.0;
    return PendulumEnv(c);
}

// Fine-step RK4 reference for the frictionless, unforced pendulum.
Eigen::Vector2d rk4(Eigen::Vector2d x, double seconds, double g) {
    const int n = 20000;
    const double h = seconds / n;
    auto f = [g](const Eigen::Vector2d& s) { return Eigen::Vector2d(s(1), g * std::sin(s(0))); };
    for (int i = 0; i < n; ++i) {
        const Eigen::Vector2d k1 = f(x);
        const Eigen::Vector2d k2 = f(x + 0.5 * h * k1);
        const Eigen::Vector2d k3 = f(x + 0.5 * h * k2);
        const Eigen::Vector2d k4 = f(x + h * k3);
        x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return x;
}

} // namespace

TEST_CASE("pendulum rests at the upright equilibrium") {
    PendulumEnv env = frictionless();
    env.reset(0);
    env.set_state(0.0, 0.0);
    for (int t = 0; t < 50; ++t) {
        const StepResult r = env.step(act(0.0));
        CHECK(r.reward == 0.0);
        CHECK(env.state()(0) == 0.0);
    }
}

TEST_CASE("pendulum energy per step and agreement with RK4") {
    PendulumEnv env = frictionless();
    env.reset(0);
    for (double theta0 : {0.01, 0.3, 1.5, 3.0}) {
        env.set_state(theta0, 0.0);
        double prev = env.energy();
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            env.step(act(0.0));
            worst = std::max(worst, std::abs(env.energy() - prev));
            prev = env.energy();
        }
        CHECK(worst <= 1e-3);
        const Eigen::Vector2d ref = rk4(Eigen::Vector2d(theta0, 0.0), 20 * 0.05, 9.81);
        CHECK(std::abs(env.state()(0) - ref(0)) <= 1e-3);
        CHECK(std::abs(env.state()(1) - ref(1)) <= 1e-3);
    }
}

TEST_CASE("pendulum reward, observation and episode length") {
    PendulumEnv env;
    env.reset(1);
    env.set_state(0.5, -1.0);
    const StepResult r = env.step(act(2.0));
    CHECK(r.reward == doctest::Approx(-(0.25 + 0.1 + 0.004)));
    CHECK(r.observation.size() == 3);
    CHECK(r.observation(0) == doctest::Approx(std::cos(env.state()(0))));
    int steps = 1;
    bool done = false;
    while (!done) {
        done = env.step(act(0.0)).done;
        ++steps;
    }
    CHECK(steps == 200);
    CHECK_THROWS_AS(env.step(act(0.0)), std::logic_error);
    CHECK(wrap_angle(2.0 * M_PI + 0.1) == doctest::Approx(0.1));
    CHECK(std::abs(wrap_angle(-M_PI + 1e-9)) <= M_PI);
}

TEST_CASE("pendulum reset distribution and action checks") {
    PendulumEnv env;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        env.reset(seed);
        CHECK(std::abs(env.state()(0)) <= M_PI);
        CHECK(std::abs(env.state()(1)) <= 1.0);
    }
    CHECK_THROWS_AS(env.step(act(2.5)), std::invalid_argument);
    CHECK_THROWS_AS(PendulumEnv().step(act(0.0)), std::logic_error);
}

TEST_CASE("chain walk") {
    ChainConfig c;
    c.slip_prob = 0.0;
    ChainEnv env(c);
    env.reset(0);
    CHECK(env.position() == 3);
    CHECK(env.step(act(1)).reward == 0.0);
    CHECK(env.position() == 4);
    env.step(act(1));
    CHECK(env.position() == 5);
    CHECK(env.step(act(1)).reward == doctest::Approx(c.trap_reward));
    CHECK(env.position() == 6);
    const StepResult last = env.step(act(0));
    CHECK(last.reward == 1.0);
    CHECK(last.done);
    CHECK_THROWS_AS(env.step(act(0)), std::logic_error);
    env.reset(1);
    CHECK_THROWS_AS(env.step(act(2)), std::invalid_argument);
    CHECK(ChainEnv::decode(Vector::Unit(7, 4)) == 4);
}

TEST_CASE("chain episodes match the tabular model") {
    ChainEnv env;
    const TabularMdp mdp = env.to_tabular();
    Matrix policy(8, 2);
    policy << 0.5, 0.5, 0.2, 0.8, 0.3, 0.7, 0.6, 0.4, 0.1, 0.9, 0.25, 0.75, 0.5, 0.5, 0.5, 0.5;
    const double exact = robust_policy_evaluation(mdp, policy, 0.0, 1e-13)(3);
    std::mt19937_64 pick(17);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    constexpr int n = 100000;
    double sum = 0.0;
    double sq = 0.0;
    for (int e = 0; e < n; ++e) {
        env.reset(derive_seed(5, static_cast<std::uint64_t>(e), kEnvStream));
        double ret = 0.0;
        double disc = 1.0;
        bool done = false;
        while (!done) {
            const int s = env.position();
            const StepResult r = env.step(act(unit(pick) < policy(s, 1) ? 1 : 0));
            ret += disc * r.reward;
            disc *= env.return_discount();
            done = r.done;
        }
        sum += ret;
        sq += ret * ret;
    }
    const double mean = sum / n;
    const double se = std::sqrt((sq / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean - exact) <= 3.0 * se);
}

TEST_CASE("branch sampling") {
    SUBCASE("deterministic pendulum branches coincide") {
        PendulumEnv env;
        env.reset(3);
        const EnvSnapshot snap = env.snapshot();
        std::mt19937_64 rng(1);
        const auto out = branch_sample(env, snap, act(0.7), 4, rng);
        for (const auto& r : out) {
            CHECK(r.observation == out[0].observation);
            CHECK(r.reward == out[0].reward);
        }
        CHECK(env.state() == snap.state);
    }
    SUBCASE("chain slip frequency") {
        ChainConfig c;
        c.slip_prob = 0.2;
        ChainEnv env(c);
        env.reset(0);
        const EnvSnapshot snap = env.snapshot();
        std::mt19937_64 rng(2);
        const auto out = branch_sample(env, snap, act(1), 10000, rng);
        int slips = 0;
        for (const auto& r : out) {
            slips += ChainEnv::decode(r.observation) == 2 ? 1 : 0;
        }
        CHECK(std::abs(slips / 10000.0 - 0.2) <= 0.01);
        CHECK(env.position() == 3);
    }
    SUBCASE("one branch equals an ordinary step") {
        ChainEnv env(ChainConfig{0.4, -0.2, 3, 0.95, 1000});
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            env.reset(seed);
            ChainEnv twin = env;
            std::mt19937_64 rng(seed);
            const auto out = branch_sample(env, env.snapshot(), act(1), 1, rng);
            CHECK(out[0].observation == twin.step(act(1)).observation);
        }
    }
    SUBCASE("invalid requests") {
        ChainEnv env;
        std::mt19937_64 rng(0);
        CHECK_THROWS_AS(branch_sample(env, env.snapshot(), act(1), 1, rng), std::invalid_argument);
        env.reset(0);
        CHECK_THROWS_AS(branch_sample(env, env.snapshot(), act(1), 0, rng), std::invalid_argument);
        PendulumEnv pend;
        pend.reset(0);
        CHECK_THROWS_AS(env.restore(pend.snapshot()), std::invalid_argument);
    }
}

TEST_CASE("snapshot round trip reproduces trajectories") {
    ChainEnv env(ChainConfig{0.3, -0.2, 3, 0.95, 1000});
    env.reset(9);
    const EnvSnapshot snap = env.snapshot();
    std::vector<int> first;
    for (int t = 0; t < 6 && !env.done(); ++t) {
        env.step(act(t % 2));
        first.push_back(env.position());
    }
    env.restore(snap);
    std::vector<int> second;
    for (int t = 0; t < 6 && !env.done(); ++t) {
        env.step(act(t % 2));
        second.push_back(env.position());
    }
    CHECK(first == second);
}

TEST_CASE("physics scaling") {
    SUBCASE("unit scales are bit-identical") {
        PendulumEnv a;
        PendulumEnv b;
        apply_physics_scale(b, {{"mass", 1.0}, {"length", 1.0}, {"damping", 1.0}});
        a.reset(4);
        b.reset(4);
        for (int t = 0; t < 100; ++t) {
            CHECK(a.step(act(0.3)).observation == b.step(act(0.3)).observation);
        }
    }
    SUBCASE("heavier pendulum accelerates less at the bottom") {
        PendulumEnv env;
        const double light = std::abs(env.angular_acceleration(M_PI, 0.0, 1.5));
        apply_physics_scale(env, {{"mass", 2.0}});
        CHECK(std::abs(env.angular_acceleration(M_PI, 0.0, 1.5)) < light);
    }
    SUBCASE("scales never compound") {
        PendulumEnv env;
        apply_physics_scale(env, {{"mass", 1.3}});
        apply_physics_scale(env, {{"mass", 1.3}});
        CHECK(env.physics().at("mass") == doctest::Approx(1.3));
        CHECK(env.nominal_params().at("mass") == 1.0);
        std::mt19937_64 rng(0);
        std::uniform_real_distribution<double> u(0.7, 1.3);
        for (int k = 0; k < 100; ++k) {
            apply_physics_scale(env, {{"mass", u(rng)}, {"damping", u(rng)}, {"length", u(rng)}});
            for (const char* name : {"mass", "damping", "length"}) {
                const double ratio = env.physics().at(name) / env.nominal_params().at(name);
                CHECK(ratio >= 0.7);
                CHECK(ratio <= 1.3);
            }
        }
    }
    SUBCASE("errors") {
        PendulumEnv env;
        CHECK_THROWS_AS(apply_physics_scale(env, {{"mass", 0.0}}), std::invalid_argument);
        CHECK_THROWS_AS(apply_physics_scale(env, {{"friction", 1.0}}), std::invalid_argument);
        ChainEnv chain;
        CHECK_THROWS_AS(apply_physics_scale(chain, {{"slip_prob", 6.0}}), std::invalid_argument);
    }
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, 2, kEnvStream) == derive_seed(1, 2, kEnvStream));
    CHECK(derive_seed(1, 2, kEnvStream) != derive_seed(1, 2, kPolicyStream));
    CHECK(derive_seed(1, 2, kEnvStream) != derive_seed(1, 3, kEnvStream));
    std::mt19937_64 a(5);
    a.discard(10);
    std::mt19937_64 b;
    load_engine_state(b, engine_state(a));
    CHECK(a() == b());
    CHECK_THROWS_AS(load_engine_state(b, "nonsense"), std::invalid_argument);
}
