#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "bsvbs/learner.hpp"

namespace bsvbs {

// One slot of a completed run.
struct RunRecord {
    std::uint64_t t = 0;
    std::uint32_t arm = 0;
    double reward = 0.0;     // normalized, in [0, 1]
    double raw_reward = 0.0; // utility - delta * power
    double r_dl = 0.0;
    double r_ul = 0.0;
    double total_w = 0.0;
    double cpu_w = 0.0;
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<RunRecord> records;
    // Full per-slot reward rows; present only when hindsight metrics were
    // requested for the run.
    std::vector<std::vector<double>> reward_rows;
};

struct RegretCurve {
    std::vector<double> mean;    // cumulative regret per slot, seed-averaged
    std::vector<double> ci_half; // 95% normal half-width, plotting only
    std::size_t seeds = 0;
};

// Prefix-hindsight regret: at every t the benchmark is the best fixed arm of
// the first t rows, so R_t/t is meaningful at every point of the curve and
// the value at the horizon equals the static-regret definition.
inline std::vector<double> regret_series(const SeedRun& run) {
    if (run.reward_rows.empty())
        throw std::invalid_argument("regret requires per-slot reward rows; enable row recording");
    if (run.reward_rows.size() != run.records.size())
        throw std::invalid_argument("reward rows and records disagree on horizon");
    const std::size_t arms = run.reward_rows.front().size();
    std::vector<double> arm_prefix(arms, 0.0);
    std::vector<double> out(run.records.size());
    double played_prefix = 0.0;
    for (std::size_t i = 0; i < run.records.size(); ++i) {
        const auto& row = run.reward_rows[i];
        if (row.size() != arms) throw std::invalid_argument("ragged reward rows");
        for (std::size_t a = 0; a < arms; ++a) arm_prefix[a] += row[a];
        played_prefix += run.records[i].reward;
        double best = arm_prefix[0];
        for (std::size_t a = 1; a < arms; ++a) best = std::max(best, arm_prefix[a]);
        out[i] = best - played_prefix;
    }
    return out;
}

inline RegretCurve regret_curve(const std::vector<SeedRun>& runs) {
    if (runs.empty()) throw std::invalid_argument("regret_curve needs at least one run");
    const std::size_t horizon = runs.front().records.size();
    std::vector<std::vector<double>> series;
    series.reserve(runs.size());
    for (const auto& run : runs) {
        if (run.records.size() != horizon)
            throw std::invalid_argument("runs have different horizons");
        series.push_back(regret_series(run));
    }
    RegretCurve curve;
    curve.seeds = runs.size();
    curve.mean.resize(horizon);
    curve.ci_half.resize(horizon, 0.0);
    const double n = static_cast<double>(runs.size());
    for (std::size_t t = 0; t < horizon; ++t) {
        double sum = 0.0;
        for (const auto& s : series) sum += s[t];
        curve.mean[t] = sum / n;
        if (runs.size() > 1) {
            double var = 0.0;
            for (const auto& s : series) {
                const double d = s[t] - curve.mean[t];
                var += d * d;
            }
            var /= (n - 1.0);
            curve.ci_half[t] = 1.96 * std::sqrt(var / n);
        }
    }
    return curve;
}

// R_t / t at a 1-based slot.
inline double average_regret(const RegretCurve& curve, std::uint64_t t) {
    if (t < 1 || t > curve.mean.size()) throw std::out_of_range("slot outside curve");
    return curve.mean[t - 1] / static_cast<double>(t);
}

inline double bound_ratio(const RegretCurve& curve, std::size_t arm_count) {
    return curve.mean.back() / exp3_regret_bound(arm_count, curve.mean.size());
}

inline double percent_below_bound(const RegretCurve& curve, std::size_t arm_count) {
    return 100.0 * (1.0 - bound_ratio(curve, arm_count));
}

struct HyperslotSeries {
    std::vector<double> mean_total_w;
    std::vector<double> mean_cpu_w;
    std::size_t dropped_slots = 0; // trailing partial window, if any
};

// Power aggregated over fixed windows of `width` slots.
inline HyperslotSeries hyperslot_power(const std::vector<RunRecord>& records, std::size_t width) {
    if (width < 1) throw std::invalid_argument("hyper-slot width must be >= 1");
    HyperslotSeries series;
    const std::size_t windows = records.size() / width;
    series.dropped_slots = records.size() - windows * width;
    series.mean_total_w.resize(windows);
    series.mean_cpu_w.resize(windows);
    for (std::size_t w = 0; w < windows; ++w) {
        double total = 0.0, cpu = 0.0;
        for (std::size_t i = w * width; i < (w + 1) * width; ++i) {
            total += records[i].total_w;
            cpu += records[i].cpu_w;
        }
        series.mean_total_w[w] = total / static_cast<double>(width);
        series.mean_cpu_w[w] = cpu / static_cast<double>(width);
    }
    return series;
}

// Gain of an algorithm toward the ideal minimum, relative to the reference's
// gap: 100 * (ref - alg) / (ref - min).
inline double savings_percent(double alg_kw, double ref_kw, double min_kw) {
    if (ref_kw < min_kw) throw std::invalid_argument("reference below the ideal minimum");
    if (ref_kw == min_kw)
        throw std::domain_error("savings undefined: reference equals the ideal minimum");
    return 100.0 * (ref_kw - alg_kw) / (ref_kw - min_kw);
}

} // namespace bsvbs
