#include <cstdio>
#include <cstdlib>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bsvbs/config.hpp"
#include "bsvbs/harness.hpp"
#include "bsvbs/learner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::uint64_t> seed_list;
    unsigned jobs = 0; // 0 = keep config value
    bool jobs_set = false;
    std::string out_dir;
    bool plots = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_config = true) {
    auto* c = cmd->add_option("-c,--config", opts.config_path, "run configuration file");
    if (needs_config) c->required();
    cmd->add_option("--seed-list", opts.seed_list, "seeds to run (overrides run.seeds)")
        ->delimiter(',');
    cmd->add_option("--jobs", opts.jobs, "parallel seed workers (0 = all cores)")
        ->each([&](const std::string&) { opts.jobs_set = true; });
    cmd->add_option("--out-dir", opts.out_dir, "output directory");
    cmd->add_flag("--plots", opts.plots, "also render SVG charts");
}

bsvbs::RunConfig load_with_overrides(const CommonOpts& opts) {
    bsvbs::RunConfig cfg = bsvbs::load_run_config(opts.config_path);
    if (!opts.seed_list.empty()) cfg.seeds = opts.seed_list;
    if (opts.jobs_set) cfg.jobs = opts.jobs;
    if (!opts.out_dir.empty()) {
        cfg.out_dir = opts.out_dir;
    } else if (cfg.out_dir.empty()) {
        if (const char* env_dir = std::getenv("BSVBS_OUT_DIR")) cfg.out_dir = env_dir;
    }
    if (opts.plots) cfg.plots = true;
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bsvbs - adversarial-bandit radio-policy scheduler and simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts, compare_opts, sweep_opts, trace_opts;

    auto* run_cmd = app.add_subcommand("run", "execute one experiment from a config file");
    add_common(run_cmd, run_opts);

    auto* compare_cmd =
        app.add_subcommand("compare", "run several learners on identical seed streams");
    add_common(compare_cmd, compare_opts);
    std::vector<std::string> learners;
    std::string ref_learner;
    compare_cmd->add_option("--learners", learners, "comma-separated learner list")
        ->delimiter(',')
        ->required();
    compare_cmd->add_option("--ref", ref_learner,
                            "reference learner for the saving columns (default: last listed)");

    auto* sweep_cmd = app.add_subcommand("sweep-delta", "hyper-slot power per delta value");
    add_common(sweep_cmd, sweep_opts);
    std::vector<double> deltas;
    sweep_cmd->add_option("--deltas", deltas, "comma-separated delta values")
        ->delimiter(',')
        ->required();

    auto* bound_cmd = app.add_subcommand("bound", "print the expected-regret bound");
    std::uint64_t bound_arms = 0, bound_horizon = 0;
    bound_cmd->add_option("--arms", bound_arms, "number of configurations |X|")->required();
    bound_cmd->add_option("--horizon", bound_horizon, "horizon T")->required();

    auto* trace_cmd = app.add_subcommand("gen-trace", "export the surrogate model as a trace CSV");
    add_common(trace_cmd, trace_opts);
    std::string trace_out;
    trace_cmd->add_option("-o,--output", trace_out, "trace CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1; // bad usage is a validation error
    }

    try {
        if (*run_cmd) {
            const auto dir = bsvbs::run_experiment(load_with_overrides(run_opts));
            std::printf("run complete, artifacts in %s\n", dir.string().c_str());
        } else if (*compare_cmd) {
            const auto cfg = load_with_overrides(compare_opts);
            if (ref_learner.empty()) ref_learner = learners.back();
            const auto result = bsvbs::compare_learners(cfg, learners);
            const auto path = bsvbs::write_compare_csv(cfg, result, ref_learner);
            std::printf("comparison written to %s\n", path.string().c_str());
        } else if (*sweep_cmd) {
            const auto path = bsvbs::sweep_delta(load_with_overrides(sweep_opts), deltas);
            std::printf("sweep written to %s\n", path.string().c_str());
        } else if (*bound_cmd) {
            if (bound_arms < 2) throw bsvbs::ConfigError("--arms must be >= 2");
            if (bound_horizon < 1) throw bsvbs::ConfigError("--horizon must be >= 1");
            std::printf("%s\n",
                        bsvbs::format_double(bsvbs::exp3_regret_bound(bound_arms, bound_horizon))
                            .c_str());
        } else if (*trace_cmd) {
            bsvbs::gen_trace(load_with_overrides(trace_opts), trace_out);
            std::printf("trace written to %s\n", trace_out.c_str());
        }
    } catch (const bsvbs::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
