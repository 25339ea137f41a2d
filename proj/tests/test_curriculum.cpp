#include "drspcrl/curriculum.hpp"

#include "doctest.h"

#include <random>
#include <stdexcept>
#include <vector>

using namespace drspcrl;

TEST_CASE("drspcrl step formula") {
    CHECK(drspcrl_step(CurriculumState::start(1.0, 1.0, 0.5, 0.1), 0.0).epsilon_t == 1.0);
    CHECK(drspcrl_step(CurriculumState::start(0.0, 1.0, 0.5, 0.1), 0.0).epsilon_t == doctest::Approx(0.1));
    CHECK(drspcrl_step(CurriculumState::start(0.5, 1.0, 0.5, 0.1), 2.0).epsilon_t == doctest::Approx(0.35));
}

TEST_CASE("drspcrl step clamps and records history") {
    CurriculumState s = CurriculumState::start(0.05, 1.0, 1.0, 0.1);
    s = drspcrl_step(std::move(s), 100.0);
    CHECK(s.epsilon_t == 0.0);
    s = drspcrl_step(std::move(s), 0.0);
    CHECK(s.step_count == 2);
    REQUIRE(s.history.size() == 2);
    CHECK(s.history[0].beta_estimate == 100.0);
    CHECK(s.history[1].epsilon == s.epsilon_t);
    CHECK_THROWS_AS(drspcrl_step(s, -1.0), std::invalid_argument);
}

TEST_CASE("curriculum state validation") {
    CHECK_THROWS_AS(CurriculumState::start(1.5, 1.0, 1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(CurriculumState::start(0.0, -1.0, 1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(CurriculumState::start(0.0, 1.0, -0.5, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(CurriculumState::start(0.0, 1.0, 1.0, 0.0), std::invalid_argument);
    CHECK_NOTHROW(CurriculumState::start(0.0, 1.0, 0.0, 0.01));
    CHECK(CurriculumState::start(0.0, 1.0, 1.0, 0.01).project(2.0) == 1.0);
}

TEST_CASE("linear schedule") {
    const LinearSchedule cfg{0.01, 0};
    CurriculumState s = CurriculumState::start(0.0, 1.0, 1.0, 0.01);
    for (int it = 0; it < 100; ++it) {
        s = linear_step(std::move(s), it, cfg);
    }
    CHECK(s.epsilon_t == doctest::Approx(1.0));
    s = linear_step(std::move(s), 100, cfg);
    CHECK(s.epsilon_t == 1.0);

    CurriculumState early = CurriculumState::start(0.2, 1.0, 1.0, 0.01);
    early = linear_step(std::move(early), 3, LinearSchedule{0.01, 5});
    CHECK(early.epsilon_t == 0.2);

    CurriculumState frozen = CurriculumState::start(0.4, 1.0, 1.0, 0.01);
    for (int it = 0; it < 50; ++it) {
        frozen = linear_step(std::move(frozen), it, LinearSchedule{0.0, 0});
    }
    CHECK(frozen.epsilon_t == 0.4);
}

TEST_CASE("plateau schedule") {
    const PlateauSchedule cfg{10, 0, 0.1, 10, 0.01};
    const std::vector<double> flat(20, 5.0);
    CHECK(plateau_step(CurriculumState::start(0.3, 1.0, 1.0, 0.01), flat, cfg).epsilon_t ==
          doctest::Approx(0.31));

    std::vector<double> steep(10, 1.0);
    steep.insert(steep.end(), 10, 1.5);
    CHECK(plateau_step(CurriculumState::start(0.3, 1.0, 1.0, 0.01), steep, cfg).epsilon_t == 0.3);

    CHECK(plateau_step(CurriculumState::start(1.0, 1.0, 1.0, 0.01), flat, cfg).epsilon_t == 1.0);
    // Not enough history yet.
    CHECK(plateau_step(CurriculumState::start(0.3, 1.0, 1.0, 0.01), std::vector<double>(5, 1.0), cfg).epsilon_t ==
          0.3);
}

TEST_CASE("regret buffer schedule") {
    std::mt19937_64 rng(1);
    SUBCASE("generator stays within range of the current budget") {
        const RegretBufferSchedule cfg{50, 0.0, 0.01, 0.02, 1};
        for (int k = 0; k < 200; ++k) {
            RegretBuffer buffer;
            const auto s = regret_step(CurriculumState::start(0.5, 1.0, 1.0, 0.01), buffer, cfg, rng, nullptr);
            CHECK(std::abs(s.epsilon_t - 0.5) <= 0.02);
            CHECK(buffer.entries.size() == 1);
        }
    }
    SUBCASE("replay of a single entry without noise") {
        const RegretBufferSchedule cfg{50, 1.0, 0.0, 0.02, 1};
        RegretBuffer buffer{{{0.3, 1.0}}};
        CHECK(regret_step(CurriculumState::start(0.6, 1.0, 1.0, 0.01), buffer, cfg, rng, nullptr).epsilon_t == 0.3);
    }
    SUBCASE("candidates are projected") {
        const RegretBufferSchedule cfg{50, 1.0, 0.0, 0.02, 1};
        RegretBuffer buffer{{{1.05, 1.0}}};
        CHECK(regret_step(CurriculumState::start(0.6, 1.0, 1.0, 0.01), buffer, cfg, rng, nullptr).epsilon_t == 1.0);
    }
    SUBCASE("lowest scores are evicted") {
        const RegretBufferSchedule cfg{3, 0.0, 0.0, 0.5, 1};
        RegretBuffer buffer;
        CurriculumState s = CurriculumState::start(0.5, 1.0, 1.0, 0.01);
        for (int k = 0; k < 20; ++k) {
            s = regret_step(std::move(s), buffer, cfg, rng, [](double e) { return e; });
        }
        REQUIRE(buffer.entries.size() == 3);
        double lowest = 1.0;
        for (const auto& e : buffer.entries) {
            lowest = std::min(lowest, e.score);
            CHECK(e.score == e.epsilon);
        }
        CHECK(lowest >= 0.0);
    }
}

TEST_CASE("scheduler dispatch") {
    SUBCASE("fixed pins epsilon") {
        Scheduler s(FixedSchedule{0.25}, CurriculumState::start(0.0, 1.0, 1.0, 0.01));
        CHECK(s.epsilon() == 0.25);
        for (int t = 0; t < 10; ++t) {
            s.update({t, 3.0, 1.0, {}});
        }
        CHECK(s.epsilon() == 0.25);
        CHECK(s.state().history.size() == 10);
    }
    SUBCASE("drspcrl matches the free function") {
        Scheduler s(DrSpcrlSchedule{}, CurriculumState::start(0.0, 1.0, 1.0, 0.01));
        CurriculumState ref = CurriculumState::start(0.0, 1.0, 1.0, 0.01);
        for (int t = 0; t < 30; ++t) {
            const double beta = 0.1 * t;
            s.update({t, beta, 0.0, {}});
            ref = drspcrl_step(std::move(ref), beta);
            CHECK(s.epsilon() == ref.epsilon_t);
        }
    }
    SUBCASE("plateau fires on its interval only") {
        Scheduler s(PlateauSchedule{10, 5, 0.1, 2, 0.05}, CurriculumState::start(0.0, 1.0, 1.0, 0.01));
        std::vector<double> eps;
        for (int t = 0; t < 30; ++t) {
            s.update({t, 0.0, 1.0, {}});
            eps.push_back(s.epsilon());
        }
        CHECK(eps[4] == 0.0);
        CHECK(eps[5] == doctest::Approx(0.05));
        CHECK(eps[14] == doctest::Approx(0.05));
        CHECK(eps[15] == doctest::Approx(0.1));
        CHECK(eps[25] == doctest::Approx(0.15));
        CHECK(s.robust_value_history().size() == 30);
    }
    SUBCASE("regret buffer fires on its interval only") {
        Scheduler s(RegretBufferSchedule{50, 0.0, 0.0, 0.02, 4}, CurriculumState::start(0.5, 1.0, 1.0, 0.01), 3);
        for (int t = 0; t < 4; ++t) {
            s.update({t, 0.0, 0.0, [](double) { return 1.0; }});
            CHECK(s.epsilon() == 0.5);
        }
        s.update({4, 0.0, 0.0, [](double) { return 1.0; }});
        CHECK(s.epsilon() != 0.5);
        CHECK(s.regret_buffer().entries.size() == 1);
    }
    SUBCASE("restore reproduces the continuation") {
        const SchedulerConfig cfg = RegretBufferSchedule{5, 0.5, 0.05, 0.1, 1};
        Scheduler a(cfg, CurriculumState::start(0.5, 1.0, 1.0, 0.01), 9);
        auto score = [](double e) { return 1.0 - e; };
        for (int t = 0; t < 10; ++t) {
            a.update({t, 0.0, 0.0, score});
        }
        Scheduler b(cfg, CurriculumState::start(0.0, 1.0, 1.0, 0.01), 0);
        b.restore(a.state(), a.regret_buffer(), a.robust_value_history(), a.rng_state());
        for (int t = 10; t < 30; ++t) {
            a.update({t, 0.0, 0.0, score});
            b.update({t, 0.0, 0.0, score});
            CHECK(a.epsilon() == b.epsilon());
        }
    }
}

TEST_CASE("scheduler config validation and names") {
    CHECK_THROWS_AS(validate(SchedulerConfig{LinearSchedule{-0.1, 0}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{PlateauSchedule{0, 0, 0.1, 1, 0.01}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{RegretBufferSchedule{0, 0.5, 0.0, 0.0, 1}}), std::invalid_argument);
    CHECK_THROWS_AS(validate(SchedulerConfig{RegretBufferSchedule{5, 1.5, 0.0, 0.0, 1}}), std::invalid_argument);
    CHECK(scheduler_name(DrSpcrlSchedule{}) == "drspcrl");
    CHECK(scheduler_name(RegretBufferSchedule{}) == "regret_buffer");
}
