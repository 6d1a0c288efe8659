#include <doctest.h>

#include <cmath>

#include "trustbed/ca_model.hpp"
#include "trustbed/random.hpp"

using namespace trustbed;
using namespace trustbed::ca;

namespace {

constexpr AgentId kJ{1};
constexpr AgentId kK{2};
constexpr AgentId kL{3};

Task taskAt(PerformanceLevel level) { return {0, level}; }

}  // namespace

TEST_CASE("minimum successful performance is the level utility") {
    CHECK(minSuccessfulPerformance(taskAt(PerformanceLevel::Good)) == 5.0);
    CHECK(minSuccessfulPerformance(taskAt(PerformanceLevel::Worst)) == -10.0);
    CHECK(minSuccessfulPerformance(taskAt(PerformanceLevel::Perfect)) == 10.0);
    CHECK(outcomeOf(taskAt(PerformanceLevel::Good), 5.0) == Outcome::Success);
    CHECK(outcomeOf(taskAt(PerformanceLevel::Good), 4.999) == Outcome::Failure);
}

TEST_CASE("weight updates") {
    const Params params;
    CHECK(updateWeight(0.5, Outcome::Success, params) == doctest::Approx(0.55));
    CHECK(updateWeight(0.5, Outcome::Failure, params) == doctest::Approx(0.45));
    CHECK(updateWeight(1.0, Outcome::Success, params) == 1.0);
    CHECK(updateWeight(0.0, Outcome::Failure, params) == 0.0);
}

TEST_CASE("weights stay in [0, 1] under random update sequences") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Params params{rng.uniform(), rng.uniform(0.0, 2.0), rng.uniform(0.0, 2.0)};
        double w = rng.uniform();
        for (int step = 0; step < 200; ++step) {
            w = updateWeight(w, rng.bernoulli(0.5) ? Outcome::Success : Outcome::Failure, params);
            REQUIRE(w >= 0.0);
            REQUIRE(w <= 1.0);
        }
    }
}

TEST_CASE("updates are monotone and converge") {
    const Params params;
    Rng rng(12);
    for (int i = 0; i < 1000; ++i) {
        const double w = rng.uniform();
        REQUIRE(updateWeight(w, Outcome::Success, params) >= w);
        REQUIRE(updateWeight(w, Outcome::Failure, params) <= w);
        const double v = rng.uniform();
        if (w <= v) {
            REQUIRE(updateWeight(w, Outcome::Success, params) <= updateWeight(v, Outcome::Success, params));
        }
    }

    double up = 0.0;
    for (int i = 0; i < 500; ++i) {
        up = updateWeight(up, Outcome::Success, params);
    }
    CHECK(up == doctest::Approx(1.0).epsilon(1e-12));

    double down = 0.99;
    int steps = 0;
    while (down > 0.0 && steps < 10000) {
        down = updateWeight(down, Outcome::Failure, params);
        ++steps;
    }
    CHECK(down == 0.0);
    CHECK(steps < 10000);
}

TEST_CASE("handling requests") {
    Trustee t(AgentId{100});
    const Task ok = taskAt(PerformanceLevel::Ok);

    SUBCASE("first request creates a connection at 0.5") {
        t.handleRequest({kJ, ok, 0});
        REQUIRE(t.weight(kJ, ok));
        CHECK(*t.weight(kJ, ok) == 0.5);
    }

    SUBCASE("an existing connection is left alone") {
        t.setWeight(kJ, ok, 0.9);
        t.handleRequest({kJ, ok, 0});
        CHECK(*t.weight(kJ, ok) == 0.9);
        CHECK(t.connectionCount() == 1);
    }

    SUBCASE("the pending list keeps duplicates") {
        t.handleRequest({kJ, ok, 0});
        t.handleRequest({kJ, ok, 0});
        CHECK(t.pending().size() == 2);
    }
}

TEST_CASE("initial weight of a new connection") {
    Trustee t(AgentId{100});
    const Task ok = taskAt(PerformanceLevel::Ok);

    SUBCASE("mean of the other trustors' weights for the same task") {
        t.setWeight(kJ, ok, 0.2);
        t.setWeight(kK, ok, 0.6);
        CHECK(t.initWeight(kL, ok) == doctest::Approx(0.4));
        t.handleRequest({kL, ok, 3});
        CHECK(*t.weight(kL, ok) == doctest::Approx(0.4));
    }

    SUBCASE("no other connections") { CHECK(t.initWeight(kL, ok) == 0.5); }

    SUBCASE("connections for other tasks do not count") {
        t.setWeight(kJ, taskAt(PerformanceLevel::Good), 0.1);
        CHECK(t.initWeight(kL, ok) == 0.5);
    }

    SUBCASE("running tally matches a direct mean after updates and removals") {
        Rng rng(13);
        std::vector<double> weights(30);
        for (std::size_t i = 0; i < weights.size(); ++i) {
            weights[i] = rng.uniform();
            t.setWeight(AgentId{1000 + i}, ok, weights[i]);
        }
        for (int step = 0; step < 200; ++step) {
            const std::size_t i = rng.index(weights.size());
            weights[i] = rng.uniform();
            t.setWeight(AgentId{1000 + i}, ok, weights[i]);
        }
        t.forgetTrustor(AgentId{1000});
        double sum = 0.0;
        for (std::size_t i = 1; i < weights.size(); ++i) {
            sum += weights[i];
        }
        CHECK(t.initWeight(kL, ok) == doctest::Approx(sum / 29.0).epsilon(1e-12));
        // The trustor's own connection is excluded.
        CHECK(t.initWeight(AgentId{1001}, ok) == doctest::Approx((sum - weights[1]) / 28.0).epsilon(1e-12));
    }
}

TEST_CASE("selecting the best request") {
    Trustee t(AgentId{100});
    const Task ok = taskAt(PerformanceLevel::Ok);

    SUBCASE("argmax weight") {
        t.setWeight(kJ, ok, 0.3);
        t.setWeight(kK, ok, 0.7);
        t.handleRequest({kJ, ok, 0});
        t.handleRequest({kK, ok, 0});
        CHECK(t.selectBestRequest()->trustor == kK);
    }

    SUBCASE("empty list") { CHECK_FALSE(t.selectBestRequest().has_value()); }

    SUBCASE("ties go to the earliest round then lowest trustor id") {
        t.handleRequest({kK, ok, 1});
        t.handleRequest({kL, ok, 0});
        t.handleRequest({kJ, ok, 1});
        CHECK(t.selectBestRequest()->trustor == kL);
        t.attemptTask({kL, ok, 0}, false, Params{});
        CHECK(t.selectBestRequest()->trustor == kJ);
    }
}

TEST_CASE("threshold gate") {
    Trustee t(AgentId{100});
    const Task ok = taskAt(PerformanceLevel::Ok);
    const Params params;

    SUBCASE("equal to the threshold attempts") {
        t.handleRequest({kJ, ok, 0});
        CHECK(t.attemptTask({kJ, ok, 0}, false, params) == Decision::Attempt);
        CHECK(t.pending().empty());
    }

    SUBCASE("below the threshold declines and still removes the message") {
        t.setWeight(kJ, ok, 0.49);
        t.handleRequest({kJ, ok, 0});
        CHECK(t.attemptTask({kJ, ok, 0}, false, params) == Decision::Decline);
        CHECK(t.pending().empty());
        CHECK(*t.weight(kJ, ok) == 0.49);
    }

    SUBCASE("a task already done is declined without a weight change") {
        t.setWeight(kJ, ok, 0.9);
        t.handleRequest({kJ, ok, 0});
        CHECK(t.attemptTask({kJ, ok, 0}, true, params) == Decision::Decline);
        CHECK(*t.weight(kJ, ok) == 0.9);
    }

    SUBCASE("a fresh trustee attempts every level") {
        for (auto level : kLevelsHardestFirst) {
            t.handleRequest({kJ, taskAt(level), 0});
            CHECK(t.attemptTask({kJ, taskAt(level), 0}, false, params) == Decision::Attempt);
        }
    }
}

TEST_CASE("completing a task") {
    Trustee t(AgentId{100});
    const Params params;
    const Task good = taskAt(PerformanceLevel::Good);
    t.handleRequest({kJ, good, 0});
    CHECK(t.completeTask({kJ, good, 0}, 6.0, params) == Outcome::Success);
    CHECK(*t.weight(kJ, good) == doctest::Approx(0.55));
    CHECK(t.completeTask({kJ, good, 0}, 4.0, params) == Outcome::Failure);
    CHECK(*t.weight(kJ, good) == doctest::Approx(0.55 - 0.1 * 0.45));
}

TEST_CASE("promoting harder tasks") {
    Trustee t(AgentId{100});
    const Params params;
    const Task ok = taskAt(PerformanceLevel::Ok);
    const Task good = taskAt(PerformanceLevel::Good);
    const Task perfect = taskAt(PerformanceLevel::Perfect);

    SUBCASE("a met harder level is raised to the threshold") {
        t.setWeight(kJ, good, 0.3);
        t.promoteHarderTasks(kJ, ok, 7.0, params);
        CHECK(*t.weight(kJ, good) == 0.5);
    }

    SUBCASE("an unmet harder level is unchanged") {
        t.setWeight(kJ, perfect, 0.3);
        t.promoteHarderTasks(kJ, ok, 7.0, params);
        CHECK(*t.weight(kJ, perfect) == 0.3);
    }

    SUBCASE("levels already at or above the threshold are unchanged") {
        t.setWeight(kJ, good, 0.8);
        t.promoteHarderTasks(kJ, ok, 7.0, params);
        CHECK(*t.weight(kJ, good) == 0.8);
    }

    SUBCASE("missing connections are not created") {
        t.promoteHarderTasks(kJ, ok, 10.0, params);
        CHECK(t.connectionCount() == 0);
    }

    SUBCASE("never lowers a weight and never touches other trustors or easier levels") {
        Rng rng(14);
        for (int trial = 0; trial < 500; ++trial) {
            Trustee u(AgentId{100});
            for (AgentId who : {kJ, kK}) {
                for (auto level : kLevelsHardestFirst) {
                    u.setWeight(who, taskAt(level), rng.uniform());
                }
            }
            const auto executed = kLevelsHardestFirst[rng.index(kLevelsHardestFirst.size())];
            Trustee before = u;
            u.promoteHarderTasks(kJ, taskAt(executed), rng.uniform(-10.0, 10.0), params);
            for (auto level : kLevelsHardestFirst) {
                REQUIRE(*u.weight(kJ, taskAt(level)) >= *before.weight(kJ, taskAt(level)));
                REQUIRE(*u.weight(kK, taskAt(level)) == *before.weight(kK, taskAt(level)));
                if (utilityOf(level) <= utilityOf(executed)) {
                    REQUIRE(*u.weight(kJ, taskAt(level)) == *before.weight(kJ, taskAt(level)));
                }
            }
        }
    }

    SUBCASE("other categories are untouched") {
        const Task otherGood{1, PerformanceLevel::Good};
        t.setWeight(kJ, otherGood, 0.3);
        t.promoteHarderTasks(kJ, ok, 10.0, params);
        CHECK(*t.weight(kJ, otherGood) == 0.3);
    }
}

TEST_CASE("forgetting a trustor") {
    Trustee t(AgentId{100});
    const Task ok = taskAt(PerformanceLevel::Ok);
    t.handleRequest({kJ, ok, 0});
    t.handleRequest({kK, ok, 0});
    t.setWeight(kK, ok, 0.9);
    t.forgetTrustor(kJ);
    CHECK_FALSE(t.weight(kJ, ok).has_value());
    CHECK(t.pending().size() == 1);
    CHECK(t.initWeight(kL, ok) == doctest::Approx(0.9));
}
