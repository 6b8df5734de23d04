#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "bsvbs/metrics.hpp"

using namespace bsvbs;

namespace {

SeedRun constant_run(std::size_t horizon, double reward_arm0, double reward_arm1,
                     std::uint32_t played) {
    SeedRun run;
    run.seed = 1;
    for (std::size_t t = 1; t <= horizon; ++t) {
        RunRecord rec;
        rec.t = t;
        rec.arm = played;
        rec.reward = played == 0 ? reward_arm0 : reward_arm1;
        run.records.push_back(rec);
        run.reward_rows.push_back({reward_arm0, reward_arm1});
    }
    return run;
}

} // namespace

TEST_CASE("regret is zero when the oracle arm is always played") {
    const auto curve = regret_curve({constant_run(100, 0.2, 0.8, 1)});
    for (double r : curve.mean) CHECK(r == doctest::Approx(0.0));
    CHECK(average_regret(curve, 100) == doctest::Approx(0.0));
}

TEST_CASE("regret grows linearly when the gap is constant") {
    const auto curve = regret_curve({constant_run(50, 0.2, 0.8, 0)});
    for (std::size_t t = 1; t <= 50; ++t) {
        CHECK(curve.mean[t - 1] == doctest::Approx(0.6 * t).epsilon(1e-12));
        CHECK(average_regret(curve, t) == doctest::Approx(0.6).epsilon(1e-12));
    }
}

TEST_CASE("a single seed equals its own average and has zero half-width") {
    const auto curve = regret_curve({constant_run(10, 0.3, 0.7, 0)});
    CHECK(curve.seeds == 1);
    for (double ci : curve.ci_half) CHECK(ci == 0.0);
}

TEST_CASE("seed averaging is pointwise") {
    const auto curve = regret_curve({constant_run(20, 0.2, 0.8, 0),
                                     constant_run(20, 0.2, 0.8, 1)});
    for (std::size_t t = 1; t <= 20; ++t)
        CHECK(curve.mean[t - 1] == doctest::Approx(0.3 * t).epsilon(1e-12));
}

TEST_CASE("recomputing the curve is bit-stable") {
    const SeedRun run = constant_run(200, 0.4, 0.9, 0);
    const auto a = regret_curve({run});
    const auto b = regret_curve({run});
    for (std::size_t i = 0; i < a.mean.size(); ++i) CHECK(a.mean[i] == b.mean[i]);
}

TEST_CASE("regret requires hindsight rows") {
    SeedRun run = constant_run(5, 0.2, 0.8, 0);
    run.reward_rows.clear();
    CHECK_THROWS_AS(regret_curve({run}), std::invalid_argument);
}

TEST_CASE("bound ratio anchors") {
    RegretCurve curve;
    curve.seeds = 1;
    curve.mean.assign(10000, 0.0);
    curve.ci_half.assign(10000, 0.0);
    CHECK(bound_ratio(curve, 16) == doctest::Approx(0.0));
    curve.mean.back() = exp3_regret_bound(16, 10000);
    CHECK(bound_ratio(curve, 16) == doctest::Approx(1.0));
    CHECK(percent_below_bound(curve, 16) == doctest::Approx(0.0));
}

TEST_CASE("hyper-slot power aggregation") {
    std::vector<RunRecord> records;
    for (double w : {1.0, 3.0, 5.0, 7.0}) {
        RunRecord rec;
        rec.total_w = w;
        rec.cpu_w = w / 2.0;
        records.push_back(rec);
    }
    const auto series = hyperslot_power(records, 2);
    REQUIRE(series.mean_total_w.size() == 2);
    CHECK(series.mean_total_w[0] == doctest::Approx(2.0));
    CHECK(series.mean_total_w[1] == doctest::Approx(6.0));
    CHECK(series.mean_cpu_w[0] == doctest::Approx(1.0));
    CHECK(series.dropped_slots == 0);

    std::vector<RunRecord> constant(100000);
    for (auto& rec : constant) rec.total_w = 10.0;
    const auto wide = hyperslot_power(constant, 200);
    CHECK(wide.mean_total_w.size() == 500);
    for (double w : wide.mean_total_w) CHECK(w == doctest::Approx(10.0));

    const auto partial = hyperslot_power(records, 3);
    CHECK(partial.mean_total_w.size() == 1);
    CHECK(partial.dropped_slots == 1);

    CHECK_THROWS_AS(hyperslot_power(records, 0), std::invalid_argument);
}

TEST_CASE("power savings toward the ideal minimum") {
    // frozen from direct evaluation of 100 (ref - alg) / (ref - min)
    CHECK(savings_percent(992.1, 1052.6, 955.1) == doctest::Approx(62.051282).epsilon(1e-6));
    CHECK(savings_percent(2609.8, 2735.6, 2566.2) == doctest::Approx(74.262102).epsilon(1e-6));
    CHECK(savings_percent(501.1, 534.6, 476.7) == doctest::Approx(57.858377).epsilon(1e-6));
    CHECK(savings_percent(1313.2, 1375.2, 1284.7) == doctest::Approx(68.508287).epsilon(1e-6));
    CHECK(savings_percent(252.9, 262.4, 235.6) == doctest::Approx(35.447761).epsilon(1e-6));
    CHECK(savings_percent(660.9, 677.3, 635.0) == doctest::Approx(38.770686).epsilon(1e-6));

    CHECK(savings_percent(5.0, 8.0, 5.0) == doctest::Approx(100.0));
    CHECK_THROWS_AS(savings_percent(5.0, 5.0, 5.0), std::domain_error);
    CHECK_THROWS_AS(savings_percent(5.0, 4.0, 5.0), std::invalid_argument);
}
