#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "bsvbs/config_space.hpp"
#include "bsvbs/csv.hpp"
#include "bsvbs/reward.hpp"
#include "bsvbs/rng.hpp"

namespace bsvbs {

// Per-slot environment draw: demands in Mbit, CQIs in 1..15.
struct SlotContext {
    double d_dl = 0.0;
    double d_ul = 0.0;
    int cqi_dl = 15;
    int cqi_ul = 15;
};

enum class Scenario { A, B };
enum class Regime { high, low };

inline const char* regime_name(Regime r) { return r == Regime::high ? "high" : "low"; }

struct Range {
    double lo = 0.0;
    double hi = 0.0;
};
struct IntRange {
    int lo = 0;
    int hi = 0;
};

// Scenario A draws every slot from the high boxes (stationary).
// Scenario B alternates: odd slots high, even slots low (ping-pong adversary).
struct ScenarioSpec {
    Scenario kind = Scenario::B;
    Range high_demand_dl{29.0, 32.0};
    Range high_demand_ul{20.0, 23.0};
    Range low_demand{0.01, 1.0};
    IntRange high_cqi{13, 15};
    IntRange low_cqi{1, 3};

    double demand_floor() const {
        return kind == Scenario::B ? low_demand.lo
                                   : std::min(high_demand_dl.lo, high_demand_ul.lo);
    }
};

inline Regime slot_regime(const ScenarioSpec& spec, std::uint64_t t) {
    if (spec.kind == Scenario::A) return Regime::high;
    return (t % 2 == 1) ? Regime::high : Regime::low;
}

inline SlotContext draw_context(const ScenarioSpec& spec, std::uint64_t t, SplitMix64& rng) {
    SlotContext ctx;
    if (slot_regime(spec, t) == Regime::high) {
        ctx.d_dl = rng.uniform(spec.high_demand_dl.lo, spec.high_demand_dl.hi);
        ctx.d_ul = rng.uniform(spec.high_demand_ul.lo, spec.high_demand_ul.hi);
        ctx.cqi_dl = rng.uniform_int(spec.high_cqi.lo, spec.high_cqi.hi);
        ctx.cqi_ul = rng.uniform_int(spec.high_cqi.lo, spec.high_cqi.hi);
    } else {
        ctx.d_dl = rng.uniform(spec.low_demand.lo, spec.low_demand.hi);
        ctx.d_ul = rng.uniform(spec.low_demand.lo, spec.low_demand.hi);
        ctx.cqi_dl = rng.uniform_int(spec.low_cqi.lo, spec.low_cqi.hi);
        ctx.cqi_ul = rng.uniform_int(spec.low_cqi.lo, spec.low_cqi.hi);
    }
    return ctx;
}

// Regime-center context, used for trace generation and trace-driven replay.
inline SlotContext midpoint_context(const ScenarioSpec& spec, Regime regime) {
    SlotContext ctx;
    if (regime == Regime::high) {
        ctx.d_dl = 0.5 * (spec.high_demand_dl.lo + spec.high_demand_dl.hi);
        ctx.d_ul = 0.5 * (spec.high_demand_ul.lo + spec.high_demand_ul.hi);
        ctx.cqi_dl = ctx.cqi_ul = (spec.high_cqi.lo + spec.high_cqi.hi) / 2;
    } else {
        ctx.d_dl = ctx.d_ul = 0.5 * (spec.low_demand.lo + spec.low_demand.hi);
        ctx.cqi_dl = ctx.cqi_ul = (spec.low_cqi.lo + spec.low_cqi.hi) / 2;
    }
    return ctx;
}

// Highest MCS a reported CQI supports: 2*cqi - 2, clamped to [0, 28].
// Monotone link with CQI 15 -> MCS 28 and CQI 1 -> MCS 0.
inline int mcs_cap_for_cqi(int cqi) { return std::clamp(2 * cqi - 2, 0, 28); }

// Normalized spectral efficiency of an MCS index.
inline double mcs_efficiency(int mcs) { return (mcs + 1) / 29.0; }

// Synthetic stand-in for a measured vBS: monotone in airtime/MCS/CQI for
// throughput, load- and SNR-sensitive for CPU power (poor channels cost more
// BBU processing per delivered bit), plus a TX-power/airtime radio term.
struct SurrogateModel {
    double cap_dl = 32.0; // Mbps
    double cap_ul = 23.0;
    double p0_cpu = 4.0;  // W, idle BBU
    double kappa_dl = 1.2; // W at full DL load
    double kappa_ul = 1.8; // W at full UL load; decoding dominates BBU cost
    double eta = 0.5;      // low-SNR processing penalty
    double p0_rf = 7.0;    // W, radio idle
    double beta_tx = 3.0;  // W at max TX power and full DL airtime
    double tx_ref = 0.0;   // reference TX level; 0 = take the space's max
};

inline std::pair<TrafficOutcome, PowerReading> evaluate(const SurrogateModel& m,
                                                        const SlotContext& ctx,
                                                        const RadioPolicy& pol) {
    const int m_eff_dl = std::min(pol.mcs_dl, mcs_cap_for_cqi(ctx.cqi_dl));
    const int m_eff_ul = std::min(pol.mcs_ul, mcs_cap_for_cqi(ctx.cqi_ul));
    TrafficOutcome out;
    out.d_dl = ctx.d_dl;
    out.d_ul = ctx.d_ul;
    out.r_dl = std::min(ctx.d_dl, m.cap_dl * mcs_efficiency(m_eff_dl) * pol.airtime_dl);
    out.r_ul = std::min(ctx.d_ul, m.cap_ul * mcs_efficiency(m_eff_ul) * pol.airtime_ul);

    const double snr_dl = 1.0 + m.eta * (15 - ctx.cqi_dl) / 14.0;
    const double snr_ul = 1.0 + m.eta * (15 - ctx.cqi_ul) / 14.0;
    PowerReading p;
    p.cpu_w = m.p0_cpu + m.kappa_dl * (out.r_dl / m.cap_dl) * snr_dl +
              m.kappa_ul * (out.r_ul / m.cap_ul) * snr_ul;
    p.total_w = p.cpu_w + m.p0_rf + m.beta_tx * (pol.tx_power_dl / m.tx_ref) * pol.airtime_dl;
    return {out, p};
}

struct TraceRow {
    double r_dl = 0.0;
    double r_ul = 0.0;
    double total_w = 0.0;
    double cpu_w = 0.0;
};

// Measurements keyed by (regime bucket, arm index): one row per policy per
// context regime, covering every arm so hindsight rows can be formed.
class TraceTable {
public:
    static constexpr const char* kHeader = "bucket,arm,r_dl_mbit,r_ul_mbit,p_total_w,p_cpu_w";

    static TraceTable load(const std::string& path, std::size_t arm_count) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open trace file: " + path);
        TraceTable table;
        table.arm_count_ = arm_count;
        table.rows_.assign(2 * arm_count, std::nullopt);

        std::string line;
        std::size_t line_no = 0;
        if (!std::getline(in, line))
            throw std::runtime_error(path + ": empty trace file");
        ++line_no;
        if (std::string(trim(line)) != kHeader)
            throw std::runtime_error(path + ":1: expected header '" + kHeader + "'");

        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            const auto where = path + ":" + std::to_string(line_no);
            const auto fields = split_csv_line(line);
            if (fields.size() != 6)
                throw std::runtime_error(where + ": expected 6 fields, got " +
                                         std::to_string(fields.size()));
            Regime regime;
            const auto bucket = trim(fields[0]);
            if (bucket == "high") regime = Regime::high;
            else if (bucket == "low") regime = Regime::low;
            else throw std::runtime_error(where + ": unknown bucket '" + std::string(bucket) + "'");
            const std::uint64_t arm = parse_u64(fields[1], where + ": arm");
            if (arm >= arm_count)
                throw std::runtime_error(where + ": arm " + std::to_string(arm) +
                                         " outside configured space of " +
                                         std::to_string(arm_count));
            TraceRow row;
            row.r_dl = parse_double(fields[2], where + ": r_dl_mbit");
            row.r_ul = parse_double(fields[3], where + ": r_ul_mbit");
            row.total_w = parse_double(fields[4], where + ": p_total_w");
            row.cpu_w = parse_double(fields[5], where + ": p_cpu_w");
            if (row.r_dl < 0 || row.r_ul < 0 || row.cpu_w < 0 || row.total_w < row.cpu_w)
                throw std::runtime_error(where + ": values violate 0 <= cpu <= total, r >= 0");
            auto& slot = table.rows_[table.slot_index(regime, arm)];
            if (slot.has_value()) ++table.duplicate_warnings_; // last write wins
            slot = row;
        }

        std::string missing;
        for (Regime regime : {Regime::high, Regime::low})
            for (std::size_t arm = 0; arm < arm_count; ++arm)
                if (!table.rows_[table.slot_index(regime, arm)]) {
                    if (!missing.empty()) missing += ", ";
                    missing += "(" + std::string(regime_name(regime)) + ", " +
                               std::to_string(arm) + ")";
                }
        if (!missing.empty())
            throw std::runtime_error(path + ": incomplete trace, missing rows: " + missing);
        return table;
    }

    const TraceRow& at(Regime regime, std::size_t arm) const {
        return *rows_[slot_index(regime, arm)];
    }

    std::size_t arm_count() const { return arm_count_; }
    std::uint64_t duplicate_warnings() const { return duplicate_warnings_; }

    Range power_range(PowerSource source) const {
        Range r{0.0, 0.0};
        bool first = true;
        for (const auto& row : rows_) {
            const double v = source == PowerSource::total ? row->total_w : row->cpu_w;
            if (first) {
                r = {v, v};
                first = false;
            } else {
                r.lo = std::min(r.lo, v);
                r.hi = std::max(r.hi, v);
            }
        }
        return r;
    }

private:
    std::size_t slot_index(Regime regime, std::size_t arm) const {
        return (regime == Regime::high ? 0 : arm_count_) + arm;
    }

    std::size_t arm_count_ = 0;
    std::uint64_t duplicate_warnings_ = 0;
    std::vector<std::optional<TraceRow>> rows_;
};

// Everything the harness needs per slot, drawn once and reused for the chosen
// arm and for counterfactual rows so all arms see the same conditions.
struct SlotDraw {
    SlotContext ctx;
    Regime regime = Regime::high;
    double traffic_factor = 1.0;
    double power_factor = 1.0;
};

class Environment {
public:
    enum class Mode { surrogate, trace };

    Environment(ConfigurationSpace space, ScenarioSpec scenario, SurrogateModel model,
                double noise_sd = 0.0, bool midpoint_contexts = false)
        : space_(std::move(space)), scenario_(scenario), model_(model), mode_(Mode::surrogate),
          noise_sd_(noise_sd), midpoint_(midpoint_contexts) {
        init_model();
    }

    Environment(ConfigurationSpace space, ScenarioSpec scenario, SurrogateModel model,
                TraceTable trace, double noise_sd = 0.0)
        : space_(std::move(space)), scenario_(scenario), model_(model), mode_(Mode::trace),
          trace_(std::move(trace)), noise_sd_(noise_sd), midpoint_(true) {
        init_model();
        if (trace_->arm_count() != space_.cardinality())
            throw std::runtime_error("trace arm count does not match configured space");
    }

    Mode mode() const { return mode_; }
    const ConfigurationSpace& space() const { return space_; }
    const ScenarioSpec& scenario() const { return scenario_; }
    const SurrogateModel& model() const { return model_; }

    Regime regime_at(std::uint64_t t) const { return slot_regime(scenario_, t); }

    // Draw order per slot is fixed (context, then noise factors) and does not
    // depend on learner behaviour, so seed streams line up across learners.
    SlotDraw draw_slot(std::uint64_t t, SplitMix64& rng) const {
        SlotDraw draw;
        draw.regime = regime_at(t);
        draw.ctx = midpoint_ ? midpoint_context(scenario_, draw.regime)
                             : draw_context(scenario_, t, rng);
        if (noise_sd_ > 0.0) {
            draw.traffic_factor = std::max(0.0, 1.0 + noise_sd_ * (2.0 * rng.next_double() - 1.0));
            draw.power_factor = std::max(0.0, 1.0 + noise_sd_ * (2.0 * rng.next_double() - 1.0));
        }
        return draw;
    }

    std::pair<TrafficOutcome, PowerReading> measure(const SlotDraw& draw, std::size_t arm) const {
        std::pair<TrafficOutcome, PowerReading> result;
        if (mode_ == Mode::surrogate) {
            result = evaluate(model_, draw.ctx, space_.policy_at(arm));
        } else {
            const TraceRow& row = trace_->at(draw.regime, arm);
            result.first = TrafficOutcome{std::min(row.r_dl, draw.ctx.d_dl),
                                          std::min(row.r_ul, draw.ctx.d_ul), draw.ctx.d_dl,
                                          draw.ctx.d_ul};
            result.second = PowerReading{row.total_w, row.cpu_w};
        }
        if (noise_sd_ > 0.0) {
            auto& [out, power] = result;
            out.r_dl = std::min(out.d_dl, out.r_dl * draw.traffic_factor);
            out.r_ul = std::min(out.d_ul, out.r_ul * draw.traffic_factor);
            power.total_w *= draw.power_factor;
            power.cpu_w *= draw.power_factor;
        }
        return result;
    }

    std::vector<std::pair<TrafficOutcome, PowerReading>> measure_all(const SlotDraw& draw) const {
        std::vector<std::pair<TrafficOutcome, PowerReading>> rows;
        const std::size_t n = space_.cardinality();
        rows.reserve(n);
        for (std::size_t arm = 0; arm < n; ++arm) rows.push_back(measure(draw, arm));
        return rows;
    }

    // Conservative utility ceiling used to precompute reward bounds:
    // 2 ln(1 + capacity / demand floor).
    double utility_upper_bound() const {
        const double cap = std::max(model_.cap_dl, model_.cap_ul);
        return 2.0 * std::log(1.0 + cap / scenario_.demand_floor());
    }

    // Envelope of the selected power field over every reachable
    // (context, policy) pair, noise included.
    Range power_bounds(PowerSource source) const {
        Range r = mode_ == Mode::trace ? trace_->power_range(source) : surrogate_power_bounds(source);
        if (noise_sd_ > 0.0) {
            r.lo = std::max(0.0, r.lo * (1.0 - noise_sd_));
            r.hi = r.hi * (1.0 + noise_sd_);
        }
        return r;
    }

private:
    void init_model() {
        if (model_.tx_ref == 0.0) model_.tx_ref = space_.p_d().back();
        if (!(model_.tx_ref > 0.0))
            throw std::runtime_error("surrogate tx_ref must be positive");
    }

    // Joint CQI factor: the efficiency an MCS cap can reach at a given CQI
    // times the SNR processing penalty there. Maximized over CQI because high
    // load and high penalty cannot co-occur.
    double max_load_coeff(int mcs_axis_max) const {
        double best = 0.0;
        for (int cqi = 1; cqi <= 15; ++cqi) {
            const int m_eff = std::min(mcs_axis_max, mcs_cap_for_cqi(cqi));
            const double coeff = mcs_efficiency(m_eff) * (1.0 + model_.eta * (15 - cqi) / 14.0);
            best = std::max(best, coeff);
        }
        return best;
    }

    Range surrogate_power_bounds(PowerSource source) const {
        const double cpu_min = model_.p0_cpu;
        const double cpu_max = model_.p0_cpu +
                               model_.kappa_dl * max_load_coeff(space_.m_d().back()) * space_.a_d().back() +
                               model_.kappa_ul * max_load_coeff(space_.m_u().back()) * space_.a_u().back();
        if (source == PowerSource::cpu) return {cpu_min, cpu_max};
        const double rf_min =
            model_.p0_rf + model_.beta_tx * (space_.p_d().front() / model_.tx_ref) * space_.a_d().front();
        const double rf_max =
            model_.p0_rf + model_.beta_tx * (space_.p_d().back() / model_.tx_ref) * space_.a_d().back();
        return {cpu_min + rf_min, cpu_max + rf_max};
    }

    ConfigurationSpace space_;
    ScenarioSpec scenario_;
    SurrogateModel model_;
    Mode mode_;
    std::optional<TraceTable> trace_;
    double noise_sd_;
    bool midpoint_;
};

// Normalized reward for every arm under one slot's conditions. Hindsight-only:
// the online loop never shows this row to a learner.
inline std::vector<double> counterfactual_row(const Environment& env, const SlotDraw& draw,
                                              RewardScaler& scaler) {
    const auto rows = env.measure_all(draw);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& [outcome, power] : rows)
        out.push_back(scaler.normalize(scaler.raw(utility(outcome), power)));
    return out;
}

} // namespace bsvbs
