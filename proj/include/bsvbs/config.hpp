#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsvbs/baselines.hpp"
#include "bsvbs/config_space.hpp"
#include "bsvbs/environment.hpp"
#include "bsvbs/reward.hpp"

namespace bsvbs {

// Raised for anything a user can fix in the configuration or on the command
// line; the CLI maps it to exit code 1 (runtime faults exit with 2).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    // space axes; defaults give the 16-arm set used throughout the examples
    std::vector<double> p_d{30.0};
    std::vector<int> m_d{16, 27};
    std::vector<double> a_d{0.5, 1.0};
    std::vector<int> m_u{16, 27};
    std::vector<double> a_u{0.5, 1.0};

    // environment
    std::string env_mode = "surrogate"; // or "trace"
    std::string trace_path;
    std::string scenario = "B";
    SurrogateModel model;
    double noise_sd = 0.0;
    bool midpoint_contexts = false;

    // reward
    double delta = 1.0;
    std::string power_source = "total"; // or "cpu"
    std::optional<double> f_min;        // explicit bounds override the
    std::optional<double> f_max;        // precomputed envelope when both set

    // run
    std::string learner = "bsvbs";
    std::uint64_t horizon = 10000;
    std::vector<std::uint64_t> seeds{1};
    std::string out_dir;
    std::size_t hyperslot_width = 200;
    bool record_rows = true;
    bool anytime = false;
    unsigned jobs = 1;
    bool plots = false;

    // baseline hyperparameters
    BaselineParams baseline;
};

namespace detail {

inline nlohmann::json parse_scalar(std::string_view raw) {
    const std::string s{trim(raw)};
    if (s == "true") return true;
    if (s == "false") return false;
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    try {
        std::size_t used = 0;
        if (s.find_first_of(".eE") == std::string::npos) {
            const long long v = std::stoll(s, &used);
            if (used == s.size()) return v;
        } else {
            const double v = std::stod(s, &used);
            if (used == s.size()) return v;
        }
    } catch (const std::exception&) {
    }
    return s; // bare string
}

// Key-value grammar: one `dotted.key = value` per line, `#` comments,
// comma-separated lists. The JSON form of the same keys is accepted too.
inline nlohmann::json parse_key_value(std::istream& in, const std::string& origin) {
    nlohmann::json root = nlohmann::json::object();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        const auto eq = sv.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key{trim(sv.substr(0, eq))};
        const std::string_view value = trim(sv.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");

        nlohmann::json parsed;
        if (value.find(',') != std::string_view::npos) {
            parsed = nlohmann::json::array();
            for (auto part : split_csv_line(value)) parsed.push_back(parse_scalar(part));
        } else {
            parsed = parse_scalar(value);
        }

        nlohmann::json* node = &root;
        std::size_t start = 0;
        while (true) {
            const std::size_t dot = key.find('.', start);
            const std::string part = key.substr(start, dot - start);
            if (dot == std::string::npos) {
                (*node)[part] = std::move(parsed);
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
    return root;
}

template <typename T>
void read_if(const nlohmann::json& j, const char* section, const char* key, T& out) {
    if (!j.contains(section)) return;
    const auto& s = j.at(section);
    if (!s.contains(key)) return;
    try {
        out = s.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(section) + "." + key + ": " + e.what());
    }
}

// List-valued keys also accept a bare scalar (a one-element axis or seed list
// has no comma in the key-value syntax).
template <typename T>
void read_if(const nlohmann::json& j, const char* section, const char* key,
             std::vector<T>& out) {
    if (!j.contains(section)) return;
    const auto& s = j.at(section);
    if (!s.contains(key)) return;
    const auto& v = s.at(key);
    try {
        if (v.is_array()) {
            out = v.get<std::vector<T>>();
        } else {
            out.clear();
            out.push_back(v.get<T>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string(section) + "." + key + ": " + e.what());
    }
}

inline void read_if(const nlohmann::json& j, const char* section, const char* key,
                    std::optional<double>& out) {
    if (j.contains(section) && j.at(section).contains(key))
        out = j.at(section).at(key).get<double>();
}

} // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig cfg;
    detail::read_if(j, "space", "p_d", cfg.p_d);
    detail::read_if(j, "space", "m_d", cfg.m_d);
    detail::read_if(j, "space", "a_d", cfg.a_d);
    detail::read_if(j, "space", "m_u", cfg.m_u);
    detail::read_if(j, "space", "a_u", cfg.a_u);

    detail::read_if(j, "env", "mode", cfg.env_mode);
    detail::read_if(j, "env", "trace_path", cfg.trace_path);
    detail::read_if(j, "env", "scenario", cfg.scenario);
    detail::read_if(j, "env", "noise_sd", cfg.noise_sd);
    detail::read_if(j, "env", "midpoint_contexts", cfg.midpoint_contexts);
    if (j.contains("env") && j.at("env").contains("model")) {
        const auto& m = j.at("env").at("model");
        auto get = [&](const char* key, double& out) {
            if (m.contains(key)) out = m.at(key).get<double>();
        };
        get("cap_dl", cfg.model.cap_dl);
        get("cap_ul", cfg.model.cap_ul);
        get("p0_cpu", cfg.model.p0_cpu);
        get("kappa_dl", cfg.model.kappa_dl);
        get("kappa_ul", cfg.model.kappa_ul);
        get("eta", cfg.model.eta);
        get("p0_rf", cfg.model.p0_rf);
        get("beta_tx", cfg.model.beta_tx);
        get("tx_ref", cfg.model.tx_ref);
    }

    detail::read_if(j, "reward", "delta", cfg.delta);
    detail::read_if(j, "reward", "power_source", cfg.power_source);
    detail::read_if(j, "reward", "f_min", cfg.f_min);
    detail::read_if(j, "reward", "f_max", cfg.f_max);

    detail::read_if(j, "run", "learner", cfg.learner);
    detail::read_if(j, "run", "horizon", cfg.horizon);
    detail::read_if(j, "run", "seeds", cfg.seeds);
    detail::read_if(j, "run", "out_dir", cfg.out_dir);
    detail::read_if(j, "run", "hyperslot_width", cfg.hyperslot_width);
    detail::read_if(j, "run", "record_rows", cfg.record_rows);
    detail::read_if(j, "run", "anytime", cfg.anytime);
    detail::read_if(j, "run", "jobs", cfg.jobs);

    detail::read_if(j, "baseline", "epsilon", cfg.baseline.epsilon);
    detail::read_if(j, "baseline", "ucb_c", cfg.baseline.ucb_c);
    detail::read_if(j, "baseline", "stale_confidence", cfg.baseline.stale_confidence);
    return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    nlohmann::json j;
    if (first != std::string::npos && text[first] == '{') {
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(path + ": " + e.what());
        }
    } else {
        std::istringstream stream(text);
        j = detail::parse_key_value(stream, path);
    }
    return config_from_json(j);
}

inline void validate(const RunConfig& cfg) {
    if (cfg.horizon < 1) throw ConfigError("run.horizon must be >= 1");
    if (cfg.seeds.empty()) throw ConfigError("run.seeds must list at least one seed");
    if (!(cfg.delta > 0.0)) throw ConfigError("reward.delta must be > 0");
    if (cfg.power_source != "total" && cfg.power_source != "cpu")
        throw ConfigError("reward.power_source must be 'total' or 'cpu'");
    if (cfg.scenario != "A" && cfg.scenario != "B")
        throw ConfigError("env.scenario must be 'A' or 'B'");
    if (cfg.env_mode != "surrogate" && cfg.env_mode != "trace")
        throw ConfigError("env.mode must be 'surrogate' or 'trace'");
    if (cfg.env_mode == "trace") {
        if (cfg.trace_path.empty()) throw ConfigError("env.trace_path required in trace mode");
        if (!std::filesystem::exists(cfg.trace_path))
            throw ConfigError("env.trace_path does not exist: " + cfg.trace_path);
    }
    if (cfg.f_min.has_value() != cfg.f_max.has_value())
        throw ConfigError("reward.f_min and reward.f_max must be set together");
    if (cfg.f_min && !(*cfg.f_max > *cfg.f_min))
        throw ConfigError("reward.f_max must exceed reward.f_min");
    if (cfg.hyperslot_width < 1) throw ConfigError("run.hyperslot_width must be >= 1");
    if (cfg.noise_sd < 0.0 || cfg.noise_sd >= 1.0)
        throw ConfigError("env.noise_sd must be in [0, 1)");
    if (cfg.learner != "bsvbs" && cfg.learner != "epsilon_greedy" && cfg.learner != "ucb1" &&
        cfg.learner != "stale_ctx_ucb")
        throw ConfigError("run.learner must be one of bsvbs, epsilon_greedy, ucb1, stale_ctx_ucb");
    try {
        ConfigurationSpace space(cfg.p_d, cfg.m_d, cfg.a_d, cfg.m_u, cfg.a_u);
        if (cfg.learner == "bsvbs" && space.cardinality() < 2)
            throw ConfigError("the configuration space must hold at least 2 policies");
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

inline ConfigurationSpace make_space(const RunConfig& cfg) {
    return ConfigurationSpace(cfg.p_d, cfg.m_d, cfg.a_d, cfg.m_u, cfg.a_u);
}

inline ScenarioSpec make_scenario(const RunConfig& cfg) {
    ScenarioSpec spec;
    spec.kind = cfg.scenario == "A" ? Scenario::A : Scenario::B;
    return spec;
}

inline Environment make_environment(const RunConfig& cfg) {
    ConfigurationSpace space = make_space(cfg);
    const ScenarioSpec scenario = make_scenario(cfg);
    if (cfg.env_mode == "trace") {
        TraceTable table = TraceTable::load(cfg.trace_path, space.cardinality());
        return Environment(std::move(space), scenario, cfg.model, std::move(table), cfg.noise_sd);
    }
    return Environment(std::move(space), scenario, cfg.model, cfg.noise_sd,
                       cfg.midpoint_contexts);
}

inline PowerSource make_power_source(const RunConfig& cfg) {
    return cfg.power_source == "cpu" ? PowerSource::cpu : PowerSource::total;
}

// Explicit bounds win when configured; otherwise the envelope is derived from
// the environment's utility ceiling and power range for the given delta.
inline RewardScaler make_scaler(const RunConfig& cfg, const Environment& env, double delta) {
    const PowerSource source = make_power_source(cfg);
    if (cfg.f_min && cfg.f_max) return RewardScaler(delta, *cfg.f_min, *cfg.f_max, source);
    const Range p = env.power_bounds(source);
    return RewardScaler::from_bounds(delta, env.utility_upper_bound(), p.lo, p.hi, source);
}

inline RewardScaler make_scaler(const RunConfig& cfg, const Environment& env) {
    return make_scaler(cfg, env, cfg.delta);
}

} // namespace bsvbs
