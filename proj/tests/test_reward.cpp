#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "bsvbs/reward.hpp"
#include "bsvbs/rng.hpp"

using bsvbs::PowerReading;
using bsvbs::PowerSource;
using bsvbs::RewardScaler;
using bsvbs::scaler_bounds;
using bsvbs::TrafficOutcome;
using bsvbs::utility;

TEST_CASE("utility is the log effective-throughput sum, zero without backlog") {
    CHECK(utility({5.0, 5.0, 0.0, 23.0}) == 0.0);
    CHECK(utility({5.0, 5.0, 30.0, 0.0}) == 0.0);
    CHECK(utility({32.0, 23.0, 32.0, 23.0}) ==
          doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
    CHECK(utility({0.0, 0.0, 30.0, 20.0}) == 0.0);
}

TEST_CASE("utility grows with delivered traffic") {
    bsvbs::SplitMix64 rng(1);
    for (int i = 0; i < 200; ++i) {
        const double d_dl = rng.uniform(0.1, 32.0), d_ul = rng.uniform(0.1, 23.0);
        const double r_dl = rng.uniform(0.0, d_dl), r_ul = rng.uniform(0.0, d_ul);
        const double grown_dl = std::min(d_dl, r_dl + 0.05);
        CHECK(utility({grown_dl, r_ul, d_dl, d_ul}) >= utility({r_dl, r_ul, d_dl, d_ul}));
        const double grown_ul = std::min(d_ul, r_ul + 0.05);
        CHECK(utility({r_dl, grown_ul, d_dl, d_ul}) >= utility({r_dl, r_ul, d_dl, d_ul}));
    }
}

TEST_CASE("raw reward subtracts the weighted power term") {
    RewardScaler total(1.0, -20.0, 11.14, PowerSource::total);
    CHECK(total.raw(1.386, {13.7, 5.0}) == doctest::Approx(-12.314).epsilon(1e-12));

    RewardScaler tiny(1e-9, -1.0, 20.0, PowerSource::total);
    CHECK(tiny.raw(1.0, {13.7, 5.0}) == doctest::Approx(1.0).epsilon(1e-6));

    RewardScaler heavy(100.0, -3000.0, 20.0, PowerSource::total);
    CHECK(heavy.raw(0.0, {10.0, 4.0}) == doctest::Approx(-1000.0));

    RewardScaler cpu(1.0, -20.0, 11.14, PowerSource::cpu);
    CHECK(cpu.raw(1.0, {13.7, 5.0}) == doctest::Approx(1.0 - 5.0));
}

TEST_CASE("scaler bounds from utility ceiling and power envelope") {
    auto [lo, hi] = scaler_bounds(1.0, 16.14, 5.0, 20.0);
    CHECK(lo == doctest::Approx(-20.0));
    CHECK(hi == doctest::Approx(11.14));

    auto [lo2, hi2] = scaler_bounds(100.0, 16.14, 5.0, 20.0);
    CHECK(lo2 == doctest::Approx(-2000.0));
    CHECK(hi2 == doctest::Approx(-483.86));

    auto [lo3, hi3] = scaler_bounds(1e-9, 16.14, 0.0, 0.0);
    CHECK(lo3 == doctest::Approx(0.0));
    CHECK(hi3 == doctest::Approx(16.14));

    CHECK_THROWS_AS(scaler_bounds(0.0, 16.14, 5.0, 20.0), std::invalid_argument);
    CHECK_THROWS_AS(scaler_bounds(1.0, 16.14, 20.0, 5.0), std::invalid_argument);
}

TEST_CASE("normalization anchors, clamps and counts") {
    RewardScaler s(1.0, -20.0, 11.14, PowerSource::total);
    CHECK(s.normalize(-20.0) == 0.0);
    CHECK(s.normalize(11.14) == 1.0);
    CHECK(s.normalize(-12.314) == doctest::Approx(0.2468208092485549).epsilon(1e-12));
    CHECK(s.clamp_count() == 0);
    CHECK(s.normalize(-25.0) == 0.0);
    CHECK(s.normalize(12.0) == 1.0);
    CHECK(s.clamp_count() == 2);
}

TEST_CASE("normalization is monotone, affine between anchors, argmax-preserving") {
    RewardScaler s(2.0, -7.0, 4.0, PowerSource::cpu);
    bsvbs::SplitMix64 rng(2);
    double prev_x = -100.0, prev_y = -1.0;
    for (int i = 0; i < 500; ++i) {
        const double x = -10.0 + i * (18.0 / 500.0);
        const double y = s.normalize(x);
        CHECK(y >= prev_y);
        prev_x = x;
        prev_y = y;
    }
    (void)prev_x;

    // affine between the anchors: midpoint maps to midpoint
    RewardScaler t(1.0, -4.0, 6.0, PowerSource::total);
    const double a = rng.uniform(-4.0, 6.0), b = rng.uniform(-4.0, 6.0);
    CHECK(t.normalize(0.5 * (a + b)) ==
          doctest::Approx(0.5 * (t.normalize(a) + t.normalize(b))).epsilon(1e-12));

    // argmax over a reward vector survives the affine map
    std::vector<double> raw(8);
    for (double& v : raw) v = rng.uniform(-4.0, 6.0);
    std::size_t best_raw = 0, best_norm = 0;
    std::vector<double> norm(8);
    for (std::size_t i = 0; i < 8; ++i) norm[i] = t.normalize(raw[i]);
    for (std::size_t i = 1; i < 8; ++i) {
        if (raw[i] > raw[best_raw]) best_raw = i;
        if (norm[i] > norm[best_norm]) best_norm = i;
    }
    CHECK(best_raw == best_norm);
}

TEST_CASE("scaler construction validates its invariants") {
    CHECK_THROWS_AS(RewardScaler(0.0, -1.0, 1.0, PowerSource::total), std::invalid_argument);
    CHECK_THROWS_AS(RewardScaler(1.0, 2.0, 1.0, PowerSource::total), std::invalid_argument);
    CHECK_THROWS_AS(RewardScaler(1.0, 1.0, 1.0, PowerSource::total), std::invalid_argument);
}
