#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "bsvbs/learner.hpp"
#include "bsvbs/rng.hpp"

using bsvbs::adaptive_gamma;
using bsvbs::ArmDistribution;
using bsvbs::Exp3;
using bsvbs::exp3_distribution;
using bsvbs::exp3_gamma;
using bsvbs::exp3_regret_bound;
using bsvbs::SplitMix64;

namespace {

constexpr double kFloorTol = 1e-12;

void check_valid(const ArmDistribution& dist, double gamma) {
    double sum = 0.0;
    const double floor = gamma / static_cast<double>(dist.p.size());
    for (double p : dist.p) {
        CHECK(p >= floor - kFloorTol);
        CHECK(p <= 1.0 + kFloorTol);
        sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
}

} // namespace

TEST_CASE("exploration rate follows the closed form") {
    // frozen from direct evaluation of min{1, sqrt(K ln K / ((e-1) T))}
    CHECK(exp3_gamma(256, 50000) == doctest::Approx(0.128542134079448).epsilon(1e-9));
    CHECK(exp3_gamma(16, 10000) == doctest::Approx(0.050810739873726).epsilon(1e-9));
    CHECK(exp3_gamma(2, 1) == doctest::Approx(0.898215468045430).epsilon(1e-9));
    const double direct =
        std::sqrt(256.0 * std::log(256.0) / ((std::numbers::e - 1.0) * 50000.0));
    CHECK(exp3_gamma(256, 50000) == direct);
}

TEST_CASE("adaptive rate is the fixed-horizon formula at the current slot") {
    CHECK(adaptive_gamma(16, 1) == 1.0); // capped
    CHECK(adaptive_gamma(16, 10000) == exp3_gamma(16, 10000));
    // inverse-square-root scaling on uncapped values
    CHECK(adaptive_gamma(16, 40000) == doctest::Approx(0.5 * adaptive_gamma(16, 10000)));
}

TEST_CASE("regret bound follows the closed form") {
    CHECK(exp3_regret_bound(256, 50000) == doctest::Approx(22087.1613180061).epsilon(1e-9));
    CHECK(exp3_regret_bound(16, 10000) == doctest::Approx(1746.1434203116).epsilon(1e-9));
    CHECK(exp3_regret_bound(2, 1) == doctest::Approx(3.0867746336).epsilon(1e-8));
    CHECK(exp3_regret_bound(16, 40000) ==
          doctest::Approx(2.0 * exp3_regret_bound(16, 10000)).epsilon(1e-12));
}

TEST_CASE("construction initializes uniform weights and rejects 1-arm spaces") {
    Exp3 learner(16, 10000, SplitMix64(1));
    CHECK(learner.slot() == 1);
    CHECK(learner.gamma() == exp3_gamma(16, 10000));
    for (double lw : learner.log_weights()) CHECK(lw == 0.0);
    CHECK_THROWS_AS(Exp3(1, 100, SplitMix64(1)), std::invalid_argument);
}

TEST_CASE("distribution mixes uniform and weight-proportional terms") {
    // equal weights: exactly 1/K whatever gamma is
    for (double gamma : {0.0, 0.3, 1.0}) {
        const auto dist = exp3_distribution(std::vector<double>(8, 2.5), gamma);
        for (double p : dist.p) CHECK(p == doctest::Approx(0.125).epsilon(1e-15));
    }
    // gamma = 1: uniform regardless of weights
    const auto pure = exp3_distribution({0.0, 5.0, -3.0}, 1.0);
    for (double p : pure.p) CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    // hand evaluation for w = (1, 3), gamma = 0.5
    const auto dist = exp3_distribution({0.0, std::log(3.0)}, 0.5);
    CHECK(dist.p[0] == doctest::Approx(0.375).epsilon(1e-12));
    CHECK(dist.p[1] == doctest::Approx(0.625).epsilon(1e-12));
}

TEST_CASE("distribution invariants hold for random weight vectors") {
    SplitMix64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t k = 2 + static_cast<std::size_t>(rng.next_double() * 30);
        const double gamma = rng.next_double();
        // moderate spread: strict monotonicity is checked where doubles can
        // still resolve the softmax ratios
        std::vector<double> lw(k);
        for (double& v : lw) v = rng.uniform(-15.0, 15.0);
        const auto dist = exp3_distribution(lw, gamma);
        check_valid(dist, gamma);

        // shift invariance
        std::vector<double> shifted = lw;
        const double c = rng.uniform(-1000.0, 1000.0);
        for (double& v : shifted) v += c;
        const auto dist2 = exp3_distribution(shifted, gamma);
        for (std::size_t i = 0; i < k; ++i)
            CHECK(dist.p[i] == doctest::Approx(dist2.p[i]).epsilon(1e-12));

        // raising one arm's log-weight strictly raises its probability
        const std::size_t arm = static_cast<std::size_t>(rng.next_double() * k);
        std::vector<double> bumped = lw;
        bumped[arm] += 0.5;
        if (gamma < 1.0)
            CHECK(exp3_distribution(bumped, gamma).p[arm] > dist.p[arm]);
    }
}

TEST_CASE("sampling is deterministic and matches the distribution") {
    ArmDistribution point;
    point.p = {1.0, 0.0, 0.0, 0.0};
    Exp3 a(4, 100, SplitMix64(5));
    for (int i = 0; i < 50; ++i) CHECK(a.sample(point) == 0);

    Exp3 b(4, 100, SplitMix64(5));
    Exp3 c(4, 100, SplitMix64(5));
    const auto dist = b.distribution();
    for (int i = 0; i < 200; ++i) CHECK(b.sample(dist) == c.sample(dist));

    // uniform over 16 arms: each frequency within 1% absolute of 1/16
    Exp3 u(16, 100000, SplitMix64(11));
    ArmDistribution uniform;
    uniform.p.assign(16, 1.0 / 16.0);
    std::vector<int> counts(16, 0);
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) ++counts[u.sample(uniform)];
    for (int count : counts)
        CHECK(std::abs(count / static_cast<double>(draws) - 1.0 / 16.0) < 0.01);
}

TEST_CASE("importance-weighted estimator") {
    ArmDistribution dist;
    dist.p = {0.25, 0.75};
    CHECK(Exp3::estimate(0.5, dist, 0, 0) == doctest::Approx(2.0));
    CHECK(Exp3::estimate(0.5, dist, 0, 1) == 0.0);
    CHECK(Exp3::estimate(0.0, dist, 1, 1) == 0.0);
    CHECK_THROWS_AS(Exp3::estimate(1.5, dist, 0, 0), std::domain_error);
    CHECK_THROWS_AS(Exp3::estimate(-0.1, dist, 0, 0), std::domain_error);
}

TEST_CASE("estimator is unbiased under the sampling distribution") {
    SplitMix64 rng(123);
    for (std::size_t k : {2u, 16u}) {
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> weights(k), f(k);
            double sum = 0.0;
            for (double& w : weights) {
                w = 0.01 + rng.next_double();
                sum += w;
            }
            ArmDistribution y;
            y.p.resize(k);
            for (std::size_t i = 0; i < k; ++i) y.p[i] = weights[i] / sum;
            for (double& v : f) v = rng.next_double();
            for (std::size_t arm = 0; arm < k; ++arm) {
                double expectation = 0.0;
                for (std::size_t chosen = 0; chosen < k; ++chosen)
                    expectation += y.p[chosen] * Exp3::estimate(f[chosen], y, chosen, arm);
                CHECK(std::abs(expectation - f[arm]) <= 1e-12);
            }
        }
    }
}

TEST_CASE("update applies the exponential rule in the log domain") {
    Exp3 learner(2, 100, SplitMix64(2));
    // uniform start, gamma in state; force the documented hand example
    // y(0) = 0.5, Phi = 1/0.5 = 2, increment = gamma * 2 / 2 = gamma
    const double gamma = learner.gamma();
    learner.update(0, 1.0);
    CHECK(learner.log_weights()[0] == doctest::Approx(gamma).epsilon(1e-15));
    CHECK(learner.log_weights()[1] == 0.0);
    CHECK(learner.slot() == 2);

    // zero reward leaves weights untouched but advances the slot
    Exp3 idle(4, 100, SplitMix64(3));
    idle.update(2, 0.0);
    for (double lw : idle.log_weights()) CHECK(lw == 0.0);
    CHECK(idle.slot() == 2);
}

TEST_CASE("replaying a slot reproduces bit-identical state") {
    Exp3 a(8, 1000, SplitMix64(77));
    Exp3 b(8, 1000, SplitMix64(77));
    for (int t = 0; t < 100; ++t) {
        const auto da = a.distribution();
        const auto db = b.distribution();
        const std::size_t arm_a = a.sample(da);
        const std::size_t arm_b = b.sample(db);
        REQUIRE(arm_a == arm_b);
        const double reward = (arm_a % 2 == 0) ? 0.75 : 0.25;
        a.update(arm_a, reward);
        b.update(arm_b, reward);
        for (std::size_t i = 0; i < 8; ++i) CHECK(a.log_weights()[i] == b.log_weights()[i]);
    }
}

TEST_CASE("log-domain update matches the direct multiplicative rule on short horizons") {
    const std::size_t k = 6;
    Exp3 learner(k, 100, SplitMix64(9));
    const double gamma = learner.gamma();
    std::vector<double> w(k, 1.0); // direct-form oracle
    SplitMix64 rng(10);
    for (int t = 0; t < 100; ++t) {
        double sum = 0.0;
        for (double v : w) sum += v;
        const auto dist = learner.distribution();
        for (std::size_t i = 0; i < k; ++i) {
            const double direct = gamma / k + (1.0 - gamma) * w[i] / sum;
            CHECK(dist.p[i] == doctest::Approx(direct).epsilon(1e-10));
        }
        const std::size_t chosen = static_cast<std::size_t>(rng.next_double() * k);
        const double reward = 0.2 * rng.next_double();
        w[chosen] *= std::exp(gamma * (reward / dist.p[chosen]) / k);
        learner.update(chosen, reward);
    }
}

TEST_CASE("a million single-arm updates keep the state finite and valid") {
    Exp3 learner(16, 1000000, SplitMix64(4));
    for (int i = 0; i < 1000000; ++i) learner.update(3, 1.0);
    for (double lw : learner.log_weights()) CHECK(std::isfinite(lw));
    const auto dist = learner.distribution();
    check_valid(dist, learner.gamma());
    CHECK(dist.p[3] > 0.9);
}

TEST_CASE("long-run loss rate approaches the exploration floor on degenerate rewards") {
    // one arm pays 1, the rest 0: once concentrated, the only remaining loss
    // is the forced uniform exploration mass gamma (1 - 1/K)
    const std::size_t arms = 16, best = 5;
    Exp3 learner(arms, 10000, SplitMix64(31));
    double late_loss = 0.0;
    for (std::uint64_t t = 1; t <= 10000; ++t) {
        const auto dist = learner.distribution();
        const std::size_t arm = learner.sample(dist);
        const double reward = arm == best ? 1.0 : 0.0;
        if (t > 9000) late_loss += 1.0 - reward;
        learner.update(arm, reward);
    }
    const double floor_rate = learner.gamma() * (1.0 - 1.0 / arms);
    CHECK(late_loss / 1000.0 <= floor_rate + 0.02);
}

TEST_CASE("anytime mode recomputes gamma from the slot counter") {
    Exp3 learner(16, 0, SplitMix64(6));
    CHECK(learner.gamma() == 1.0); // adaptive at t = 1, capped
    for (int i = 0; i < 9999; ++i) learner.update(0, 0.5);
    CHECK(learner.slot() == 10000);
    CHECK(learner.gamma() == adaptive_gamma(16, 10000));
}
