#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include "bsvbs/baselines.hpp"
#include "bsvbs/config.hpp"
#include "bsvbs/csv.hpp"
#include "bsvbs/environment.hpp"
#include "bsvbs/metrics.hpp"
#include "bsvbs/svg.hpp"

namespace bsvbs {

// Stream tags: the environment stream depends only on the run seed, so every
// learner compared under the same seed sees identical contexts (common random
// numbers). Learner streams are separated per algorithm.
inline constexpr std::uint64_t kEnvStreamTag = 0;

inline std::uint64_t learner_stream_tag(std::string_view kind) {
    if (kind == "bsvbs") return 16;
    if (kind == "epsilon_greedy") return 17;
    if (kind == "ucb1") return 18;
    if (kind == "stale_ctx_ucb") return 19;
    throw std::invalid_argument("unknown learner '" + std::string(kind) + "'");
}

struct ExperimentResult {
    std::string learner;
    std::vector<SeedRun> runs;
    std::vector<std::uint64_t> clamp_counts; // per seed, same order as runs
};

namespace detail {

inline void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, n));
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    for (unsigned w = 0; w < jobs; ++w)
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    for (auto& t : workers) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace detail

// One seed of the slot loop. Per slot, in order: distribution/selection from
// state updated through t-1, environment draw and measurement, reward
// scaling, then the weighted feedback and state update.
inline SeedRun run_single_seed(const RunConfig& cfg, const Environment& env,
                               std::string_view learner_kind, std::uint64_t seed,
                               std::uint64_t* clamp_count_out = nullptr) {
    const std::size_t arms = env.space().cardinality();
    SplitMix64 env_rng = substream(seed, kEnvStreamTag);
    auto learner = make_learner(learner_kind, arms, cfg.anytime ? 0 : cfg.horizon,
                                substream(seed, learner_stream_tag(learner_kind)), cfg.baseline);
    RewardScaler scaler = make_scaler(cfg, env);

    SeedRun run;
    run.seed = seed;
    run.records.reserve(cfg.horizon);
    if (cfg.record_rows) run.reward_rows.reserve(cfg.horizon);

    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        const SlotDraw draw = env.draw_slot(t, env_rng);
        const std::size_t arm = learner->select(t);

        RunRecord rec;
        rec.t = t;
        rec.arm = static_cast<std::uint32_t>(arm);
        if (cfg.record_rows) {
            const auto measured = env.measure_all(draw);
            std::vector<double> row(arms);
            for (std::size_t a = 0; a < arms; ++a) {
                const auto& [outcome, power] = measured[a];
                const double raw = scaler.raw(utility(outcome), power);
                row[a] = scaler.normalize(raw);
                if (a == arm) {
                    rec.raw_reward = raw;
                    rec.reward = row[a];
                    rec.r_dl = outcome.r_dl;
                    rec.r_ul = outcome.r_ul;
                    rec.total_w = power.total_w;
                    rec.cpu_w = power.cpu_w;
                }
            }
            run.reward_rows.push_back(std::move(row));
        } else {
            const auto [outcome, power] = env.measure(draw, arm);
            rec.raw_reward = scaler.raw(utility(outcome), power);
            rec.reward = scaler.normalize(rec.raw_reward);
            rec.r_dl = outcome.r_dl;
            rec.r_ul = outcome.r_ul;
            rec.total_w = power.total_w;
            rec.cpu_w = power.cpu_w;
        }
        learner->feedback(arm, rec.reward, draw.regime);
        run.records.push_back(rec);
    }

    // Self-check: an envelope derived from the environment's own extrema must
    // contain every raw reward of the run.
    if (!(cfg.f_min && cfg.f_max) && scaler.clamp_count() > 0)
        throw std::runtime_error("reward envelope violated: " +
                                 std::to_string(scaler.clamp_count()) +
                                 " clamped observations with derived bounds");
    if (clamp_count_out) *clamp_count_out = scaler.clamp_count();
    return run;
}

inline ExperimentResult execute(const RunConfig& cfg, const Environment& env,
                                std::string_view learner_kind) {
    ExperimentResult result;
    result.learner = learner_kind;
    result.runs.resize(cfg.seeds.size());
    result.clamp_counts.resize(cfg.seeds.size(), 0);
    detail::parallel_for(cfg.seeds.size(), cfg.jobs, [&](std::size_t i) {
        result.runs[i] =
            run_single_seed(cfg, env, learner_kind, cfg.seeds[i], &result.clamp_counts[i]);
    });
    return result;
}

inline ExperimentResult execute(const RunConfig& cfg, const Environment& env) {
    return execute(cfg, env, cfg.learner);
}

struct SummaryRow {
    std::string learner;
    std::uint64_t horizon = 0;
    std::size_t seeds = 0;
    std::optional<double> regret_T;
    std::optional<double> regret_over_T;
    std::optional<double> pct_below_bound;
    double bound = 0.0;
    double total_kw = 0.0; // seed-mean kilowatt-sum of per-slot watt readings
    double cpu_kw = 0.0;
};

inline double kilowatt_sum(const std::vector<RunRecord>& records, bool cpu) {
    double watts = 0.0;
    for (const auto& r : records) watts += cpu ? r.cpu_w : r.total_w;
    return watts / 1000.0;
}

inline SummaryRow summarize(const ExperimentResult& result, std::size_t arms,
                            std::uint64_t horizon) {
    SummaryRow row;
    row.learner = result.learner;
    row.horizon = horizon;
    row.seeds = result.runs.size();
    row.bound = exp3_regret_bound(arms, horizon);
    for (const auto& run : result.runs) {
        row.total_kw += kilowatt_sum(run.records, false);
        row.cpu_kw += kilowatt_sum(run.records, true);
    }
    row.total_kw /= static_cast<double>(result.runs.size());
    row.cpu_kw /= static_cast<double>(result.runs.size());
    if (!result.runs.front().reward_rows.empty()) {
        const RegretCurve curve = regret_curve(result.runs);
        row.regret_T = curve.mean.back();
        row.regret_over_T = average_regret(curve, horizon);
        row.pct_below_bound = percent_below_bound(curve, arms);
    }
    return row;
}

// ---- artifact writers -----------------------------------------------------

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

inline std::string opt_str(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("nan");
}

} // namespace detail

inline void write_records_csv(const std::filesystem::path& path,
                              const std::vector<RunRecord>& records) {
    auto out = detail::open_out(path);
    out << "t,arm,reward,raw_reward,r_dl_mbit,r_ul_mbit,p_total_w,p_cpu_w\n";
    for (const auto& r : records)
        out << r.t << ',' << r.arm << ',' << format_double(r.reward) << ','
            << format_double(r.raw_reward) << ',' << format_double(r.r_dl) << ','
            << format_double(r.r_ul) << ',' << format_double(r.total_w) << ','
            << format_double(r.cpu_w) << '\n';
}

inline void write_regret_csv(const std::filesystem::path& path, const RegretCurve& curve) {
    auto out = detail::open_out(path);
    out << "t,regret_mean,regret_ci\n";
    for (std::size_t i = 0; i < curve.mean.size(); ++i)
        out << (i + 1) << ',' << format_double(curve.mean[i]) << ','
            << format_double(curve.ci_half[i]) << '\n';
}

inline void write_power_csv(const std::filesystem::path& path, const HyperslotSeries& series) {
    auto out = detail::open_out(path);
    out << "hyperslot,mean_total_w,mean_cpu_w\n";
    for (std::size_t i = 0; i < series.mean_total_w.size(); ++i)
        out << (i + 1) << ',' << format_double(series.mean_total_w[i]) << ','
            << format_double(series.mean_cpu_w[i]) << '\n';
}

inline void write_summary_csv(const std::filesystem::path& path,
                              const std::vector<SummaryRow>& rows) {
    auto out = detail::open_out(path);
    out << "learner,T,seeds,R_T,R_T_over_T,bound,percent_below_bound,total_kw,cpu_kw\n";
    for (const auto& r : rows)
        out << r.learner << ',' << r.horizon << ',' << r.seeds << ','
            << detail::opt_str(r.regret_T) << ',' << detail::opt_str(r.regret_over_T) << ','
            << format_double(r.bound) << ',' << detail::opt_str(r.pct_below_bound) << ','
            << format_double(r.total_kw) << ',' << format_double(r.cpu_kw) << '\n';
}

// Seed-averaged hyper-slot power for a whole experiment.
inline HyperslotSeries mean_hyperslot_power(const ExperimentResult& result, std::size_t width) {
    HyperslotSeries mean;
    for (const auto& run : result.runs) {
        const HyperslotSeries one = hyperslot_power(run.records, width);
        if (mean.mean_total_w.empty()) {
            mean = one;
        } else {
            for (std::size_t i = 0; i < one.mean_total_w.size(); ++i) {
                mean.mean_total_w[i] += one.mean_total_w[i];
                mean.mean_cpu_w[i] += one.mean_cpu_w[i];
            }
        }
    }
    const double n = static_cast<double>(result.runs.size());
    for (auto& v : mean.mean_total_w) v /= n;
    for (auto& v : mean.mean_cpu_w) v /= n;
    return mean;
}

inline nlohmann::json config_echo(const RunConfig& cfg) {
    nlohmann::json j;
    j["space"] = {{"p_d", cfg.p_d}, {"m_d", cfg.m_d}, {"a_d", cfg.a_d},
                  {"m_u", cfg.m_u}, {"a_u", cfg.a_u}};
    j["env"] = {{"mode", cfg.env_mode},
                {"scenario", cfg.scenario},
                {"trace_path", cfg.trace_path},
                {"noise_sd", cfg.noise_sd},
                {"midpoint_contexts", cfg.midpoint_contexts},
                {"model",
                 {{"cap_dl", cfg.model.cap_dl},
                  {"cap_ul", cfg.model.cap_ul},
                  {"p0_cpu", cfg.model.p0_cpu},
                  {"kappa_dl", cfg.model.kappa_dl},
                  {"kappa_ul", cfg.model.kappa_ul},
                  {"eta", cfg.model.eta},
                  {"p0_rf", cfg.model.p0_rf},
                  {"beta_tx", cfg.model.beta_tx},
                  {"tx_ref", cfg.model.tx_ref}}}};
    j["reward"] = {{"delta", cfg.delta}, {"power_source", cfg.power_source}};
    if (cfg.f_min) j["reward"]["f_min"] = *cfg.f_min;
    if (cfg.f_max) j["reward"]["f_max"] = *cfg.f_max;
    j["run"] = {{"learner", cfg.learner},       {"horizon", cfg.horizon},
                {"seeds", cfg.seeds},           {"hyperslot_width", cfg.hyperslot_width},
                {"record_rows", cfg.record_rows}, {"anytime", cfg.anytime}};
    j["baseline"] = {{"epsilon", cfg.baseline.epsilon},
                     {"ucb_c", cfg.baseline.ucb_c},
                     {"stale_confidence", cfg.baseline.stale_confidence}};
    // Averaging convention: each seed re-draws both the learner's and the
    // environment's randomness; reported means average over the two jointly.
    j["conventions"] = {{"seed_averaging", "joint over learner and environment randomness"},
                        {"regret", "prefix-hindsight best fixed arm at every t"},
                        {"power_units", "kilowatt-sums of per-slot watt readings"}};
    return j;
}

inline std::filesystem::path resolve_out_dir(const RunConfig& cfg) {
    return cfg.out_dir.empty() ? std::filesystem::path("bsvbs_out")
                               : std::filesystem::path(cfg.out_dir);
}

// `bsvbs run`: full experiment for one learner, artifacts on disk.
inline std::filesystem::path run_experiment(const RunConfig& cfg) {
    validate(cfg);
    const Environment env = make_environment(cfg);
    const ExperimentResult result = execute(cfg, env);

    const std::filesystem::path dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(dir);

    for (const auto& run : result.runs)
        write_records_csv(dir / ("records_seed" + std::to_string(run.seed) + ".csv"),
                          run.records);

    std::optional<RegretCurve> curve;
    if (cfg.record_rows) {
        curve = regret_curve(result.runs);
        write_regret_csv(dir / "regret_curve.csv", *curve);
    }
    const HyperslotSeries power = mean_hyperslot_power(result, cfg.hyperslot_width);
    if (power.dropped_slots > 0)
        std::fprintf(stderr, "warning: horizon not divisible by hyper-slot width, dropped %zu trailing slots\n",
                     power.dropped_slots);
    write_power_csv(dir / "power_hyperslots.csv", power);
    write_summary_csv(dir / "summary.csv",
                      {summarize(result, env.space().cardinality(), cfg.horizon)});

    nlohmann::json meta = config_echo(cfg);
    meta["clamp_counts"] = result.clamp_counts;
    {
        auto out = detail::open_out(dir / "run_meta.json");
        out << meta.dump(2) << '\n';
    }

    if (cfg.plots) {
        if (curve) {
            ChartSeries s{"regret R_t (mean of " + std::to_string(curve->seeds) + " seeds)", {}, {}};
            s.x.resize(curve->mean.size());
            for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] = static_cast<double>(i + 1);
            s.y = curve->mean;
            write_line_chart((dir / "regret.svg").string(), "Cumulative regret", "slot t", "R_t",
                             {s});
        }
        ChartSeries total{"total W", {}, power.mean_total_w};
        ChartSeries cpu{"cpu W", {}, power.mean_cpu_w};
        total.x.resize(power.mean_total_w.size());
        for (std::size_t i = 0; i < total.x.size(); ++i) total.x[i] = static_cast<double>(i + 1);
        cpu.x = total.x;
        write_line_chart((dir / "power.svg").string(), "Hyper-slot mean power", "hyper-slot",
                         "watt", {total, cpu});
    }
    return dir;
}

// Per-arm cumulative power over the environment stream of one seed; the
// hindsight minimum column of the comparison table.
struct ArmPowerSums {
    std::vector<double> total_w;
    std::vector<double> cpu_w;
};

inline ArmPowerSums arm_power_sums(const RunConfig& cfg, const Environment& env,
                                   std::uint64_t seed) {
    const std::size_t arms = env.space().cardinality();
    ArmPowerSums sums{std::vector<double>(arms, 0.0), std::vector<double>(arms, 0.0)};
    SplitMix64 env_rng = substream(seed, kEnvStreamTag);
    for (std::uint64_t t = 1; t <= cfg.horizon; ++t) {
        const SlotDraw draw = env.draw_slot(t, env_rng);
        for (std::size_t a = 0; a < arms; ++a) {
            const auto [outcome, power] = env.measure(draw, a);
            (void)outcome;
            sums.total_w[a] += power.total_w;
            sums.cpu_w[a] += power.cpu_w;
        }
    }
    return sums;
}

struct CompareResult {
    std::vector<ExperimentResult> per_learner;
    double min_total_kw = 0.0; // seed-mean cumulative power of the best fixed arm
    double min_cpu_kw = 0.0;
};

inline CompareResult compare_learners(RunConfig cfg, const std::vector<std::string>& learners) {
    cfg.record_rows = false; // the comparison reports power, not regret
    validate(cfg);
    for (const auto& l : learners) learner_stream_tag(l); // reject unknown names early
    const Environment env = make_environment(cfg);

    CompareResult result;
    for (const auto& kind : learners) result.per_learner.push_back(execute(cfg, env, kind));

    const std::size_t arms = env.space().cardinality();
    std::vector<double> total(arms, 0.0), cpu(arms, 0.0);
    for (std::uint64_t seed : cfg.seeds) {
        const ArmPowerSums sums = arm_power_sums(cfg, env, seed);
        for (std::size_t a = 0; a < arms; ++a) {
            total[a] += sums.total_w[a];
            cpu[a] += sums.cpu_w[a];
        }
    }
    const double n = static_cast<double>(cfg.seeds.size()) * 1000.0; // seed mean, W -> kW
    result.min_total_kw = *std::min_element(total.begin(), total.end()) / n;
    result.min_cpu_kw = *std::min_element(cpu.begin(), cpu.end()) / n;
    return result;
}

inline std::filesystem::path write_compare_csv(const RunConfig& cfg, const CompareResult& result,
                                               const std::string& ref_learner) {
    const std::filesystem::path dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(dir);
    auto out = detail::open_out(dir / "compare_summary.csv");

    const bool with_savings = result.per_learner.size() >= 2;
    out << "learner,T,seeds,total_kw,cpu_kw,min_total_kw,min_cpu_kw";
    if (with_savings) out << ",saving_total_percent,saving_cpu_percent";
    out << '\n';

    const std::size_t arms = make_space(cfg).cardinality();
    double ref_total = 0.0, ref_cpu = 0.0;
    for (const auto& r : result.per_learner)
        if (r.learner == ref_learner) {
            const SummaryRow row = summarize(r, arms, cfg.horizon);
            ref_total = row.total_kw;
            ref_cpu = row.cpu_kw;
        }

    for (const auto& r : result.per_learner) {
        const SummaryRow row = summarize(r, arms, cfg.horizon);
        out << r.learner << ',' << cfg.horizon << ',' << cfg.seeds.size() << ','
            << format_double(row.total_kw) << ',' << format_double(row.cpu_kw) << ','
            << format_double(result.min_total_kw) << ',' << format_double(result.min_cpu_kw);
        if (with_savings)
            out << ',' << format_double(savings_percent(row.total_kw, ref_total, result.min_total_kw))
                << ',' << format_double(savings_percent(row.cpu_kw, ref_cpu, result.min_cpu_kw));
        out << '\n';
    }
    return dir / "compare_summary.csv";
}

// `bsvbs sweep-delta`: one run set per delta with the reward envelope
// re-derived for each. Forces hindsight rows off; only power is reported.
inline std::filesystem::path sweep_delta(RunConfig cfg, const std::vector<double>& deltas) {
    for (double d : deltas)
        if (!(d > 0.0)) throw ConfigError("sweep deltas must be > 0");
    cfg.record_rows = false;
    cfg.f_min.reset();
    cfg.f_max.reset();
    validate(cfg);

    const std::filesystem::path dir = resolve_out_dir(cfg);
    std::filesystem::create_directories(dir);
    auto out = detail::open_out(dir / "sweep_delta_power.csv");
    out << "delta,hyperslot,mean_total_w,mean_cpu_w\n";

    std::vector<ChartSeries> total_series;
    for (double d : deltas) {
        RunConfig one = cfg;
        one.delta = d;
        const Environment env = make_environment(one);
        const ExperimentResult result = execute(one, env);
        const HyperslotSeries power = mean_hyperslot_power(result, one.hyperslot_width);
        for (std::size_t i = 0; i < power.mean_total_w.size(); ++i)
            out << format_double(d) << ',' << (i + 1) << ','
                << format_double(power.mean_total_w[i]) << ','
                << format_double(power.mean_cpu_w[i]) << '\n';
        if (cfg.plots) {
            ChartSeries s{"delta=" + format_double(d), {}, power.mean_total_w};
            s.x.resize(power.mean_total_w.size());
            for (std::size_t i = 0; i < s.x.size(); ++i) s.x[i] = static_cast<double>(i + 1);
            total_series.push_back(std::move(s));
        }
    }
    if (cfg.plots && !total_series.empty())
        write_line_chart((dir / "sweep_delta_power.svg").string(), "Total power vs delta",
                         "hyper-slot", "watt", total_series);
    return dir / "sweep_delta_power.csv";
}

// `bsvbs gen-trace`: exports the surrogate at regime-midpoint contexts as a
// complete (bucket, arm) trace, loadable for trace-driven replay.
inline void gen_trace(const RunConfig& cfg, const std::filesystem::path& out_path) {
    if (cfg.env_mode != "surrogate")
        throw ConfigError("gen-trace requires env.mode = surrogate");
    validate(cfg);
    const Environment env = make_environment(cfg);
    const ScenarioSpec& scenario = env.scenario();

    auto out = detail::open_out(out_path);
    out << TraceTable::kHeader << '\n';
    for (Regime regime : {Regime::high, Regime::low}) {
        const SlotContext ctx = midpoint_context(scenario, regime);
        for (std::size_t arm = 0; arm < env.space().cardinality(); ++arm) {
            const auto [outcome, power] = evaluate(env.model(), ctx, env.space().policy_at(arm));
            out << regime_name(regime) << ',' << arm << ',' << format_double(outcome.r_dl) << ','
                << format_double(outcome.r_ul) << ',' << format_double(power.total_w) << ','
                << format_double(power.cpu_w) << '\n';
        }
    }
    out.flush();
    if (!out) throw std::runtime_error("failed writing trace to " + out_path.string());
}

} // namespace bsvbs
