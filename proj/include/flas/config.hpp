#pragma once

#include <cstdint>
#include <cstdlib>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "flas/decider.hpp"
#include "flas/errors.hpp"
#include "flas/metrics.hpp"
#include "flas/report.hpp"
#include "flas/runner.hpp"
#include "flas/sim.hpp"
#include "flas/workload.hpp"

namespace flas {

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (const std::string& part : split_csv_line(s)) {
        const std::string t = trim(part);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

// One parsed [section]: key/value strings plus typed, checked access.
struct Section {
    std::string name;
    std::map<std::string, std::string> kv;
    mutable std::map<std::string, bool> consumed;

    bool has(const std::string& key) const { return kv.count(key) > 0; }

    std::string str(const std::string& key, const std::string& fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        consumed[key] = true;
        return it->second;
    }
    double num(const std::string& key, double fallback) const {
        auto it = kv.find(key);
        if (it == kv.end()) return fallback;
        consumed[key] = true;
        char* end = nullptr;
        const double v = std::strtod(it->second.c_str(), &end);
        if (end == it->second.c_str())
            throw ConfigError("[" + name + "] " + key + ": not a number: " + it->second);
        return v;
    }
    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        return static_cast<std::int64_t>(num(key, static_cast<double>(fallback)));
    }

    void reject_unconsumed() const {
        for (const auto& [key, _] : kv)
            if (!consumed.count(key))
                throw ConfigError("unknown key '" + key + "' in section [" + name + "]");
    }
};

} // namespace detail

using ScenarioConfig = ScenarioUnderTest;

// The whole run configuration: a flat key = value file with [section]
// headers. Unknown sections and keys are rejected.
struct RunConfig {
    SimParams sim;
    MetricsParams metrics;
    RunnerParams runner;
    DeciderConfig decider;
    double sla_max_rt = 1.0; // seconds

    std::int64_t seasonal_period = 150;
    int harmonics = 3;

    ProfilingThresholds profiling;
    std::vector<double> profiling_notif_rates = {6000, 8000, 10000, 12000};
    double trend_notif_rate = 10000.0; // only this rate's series trains the trend model
    WorkloadSpec profiling_spec; // profiling_mix template; notif_rate set per run
    double profiling_initial_subs = 45000.0;

    std::vector<std::string> scenarios; // workload section names, in run order
    std::vector<std::string> variants;
    int seeds = 20;
    std::string out_dir = "out";

    std::map<std::string, ScenarioConfig> workloads;

    std::vector<ProfilingScenario> profiling_scenarios() const {
        std::vector<ProfilingScenario> out;
        for (double n : profiling_notif_rates) {
            ProfilingScenario ps;
            ps.spec = profiling_spec;
            ps.spec.notif_rate = n;
            ps.initial_subs = profiling_initial_subs;
            ps.use_for_trend = n == trend_notif_rate;
            out.push_back(ps);
        }
        return out;
    }

    const ScenarioConfig& workload(const std::string& name) const {
        auto it = workloads.find(name);
        if (it == workloads.end()) throw ConfigError("no [workload " + name + "] section");
        return it->second;
    }
};

namespace detail {

inline WorkloadSpec parse_workload_keys(const Section& s, const WorkloadSpec& defaults) {
    WorkloadSpec w = defaults;
    if (s.has("kind")) w.kind = workload_kind_from_string(s.str("kind", ""));
    w.duration = s.integer("duration", w.duration);
    w.seed = static_cast<std::uint64_t>(s.integer("seed", static_cast<std::int64_t>(w.seed)));
    w.base_sub_rate = s.num("base_sub_rate", w.base_sub_rate);
    w.peak_sub_rate = s.num("peak_sub_rate", w.peak_sub_rate);
    w.period = s.integer("period", w.period);
    w.ramp = s.num("ramp", w.ramp);
    w.spike_width = s.integer("spike_width", w.spike_width);
    w.spike_count = static_cast<int>(s.integer("spike_count", w.spike_count));
    w.notif_rate = s.num("notif_rate", w.notif_rate);
    return w;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    std::vector<detail::Section> sections;
    {
        std::istringstream in(text);
        std::string line;
        detail::Section* cur = nullptr;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            line = detail::trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("line " + std::to_string(lineno) + ": unterminated section");
                sections.push_back({detail::trim(line.substr(1, line.size() - 2)), {}, {}});
                cur = &sections.back();
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            if (cur == nullptr)
                throw ConfigError("line " + std::to_string(lineno) + ": key outside any section");
            const std::string key = detail::trim(line.substr(0, eq));
            const std::string val = detail::trim(line.substr(eq + 1));
            if (!cur->kv.emplace(key, val).second)
                throw ConfigError("duplicate key '" + key + "' in section [" + cur->name + "]");
        }
    }

    RunConfig cfg;
    for (const detail::Section& s : sections) {
        if (s.name == "sim") {
            cfg.sim.mu0 = s.num("mu0", cfg.sim.mu0);
            cfg.sim.kappa = s.num("kappa", cfg.sim.kappa);
            cfg.sim.base_service_time = s.num("base_service_time", cfg.sim.base_service_time);
            cfg.sim.scaling_overhead_factor =
                s.num("scaling_overhead_factor", cfg.sim.scaling_overhead_factor);
            cfg.sim.t_a0 = s.num("t_a0", cfg.sim.t_a0);
            cfg.sim.t_a1 = s.num("t_a1", cfg.sim.t_a1);
            cfg.sim.t_a2 = s.num("t_a2", cfg.sim.t_a2);
            cfg.sim.t_noise = s.num("t_noise", cfg.sim.t_noise);
            cfg.sim.dt = s.num("dt", cfg.sim.dt);
            cfg.sim.rng_seed = static_cast<std::uint64_t>(
                s.integer("seed", static_cast<std::int64_t>(cfg.sim.rng_seed)));
            if (cfg.sim.mu0 <= 0 || cfg.sim.kappa < 0 || cfg.sim.dt <= 0 ||
                cfg.sim.scaling_overhead_factor <= 0 || cfg.sim.scaling_overhead_factor > 1)
                throw ConfigError("[sim] parameter out of range");
        } else if (s.name == "metrics") {
            cfg.metrics.noise_sigma = s.num("noise_sigma", cfg.metrics.noise_sigma);
            cfg.metrics.outlier_prob = s.num("outlier_prob", cfg.metrics.outlier_prob);
            cfg.metrics.outlier_factor = s.num("outlier_factor", cfg.metrics.outlier_factor);
            cfg.runner.metrics_window =
                static_cast<int>(s.integer("window", cfg.runner.metrics_window));
            cfg.runner.outlier_k = s.num("outlier_k", cfg.runner.outlier_k);
        } else if (s.name == "decider") {
            cfg.decider.h = static_cast<int>(s.integer("h", cfg.decider.h));
            cfg.decider.react_w = static_cast<int>(s.integer("react_w", cfg.decider.react_w));
            cfg.decider.inc_trend_th = s.num("inc_trend_th", cfg.decider.inc_trend_th);
            cfg.decider.dec_trend_th = s.num("dec_trend_th", cfg.decider.dec_trend_th);
            cfg.decider.react_upper_th =
                s.num("react_upper_th_ms", cfg.decider.react_upper_th * 1000.0) / 1000.0;
            cfg.decider.react_lower_th =
                s.num("react_lower_th_ms", cfg.decider.react_lower_th * 1000.0) / 1000.0;
            cfg.decider.majority = static_cast<int>(s.integer("majority", cfg.decider.majority));
            cfg.decider.cooldown_multiplier =
                s.num("cooldown_multiplier", cfg.decider.cooldown_multiplier);
            cfg.decider.validate();
        } else if (s.name == "forecasting") {
            cfg.runner.sg_window = static_cast<int>(s.integer("sg_window", cfg.runner.sg_window));
            cfg.runner.sg_degree = static_cast<int>(s.integer("sg_degree", cfg.runner.sg_degree));
            cfg.seasonal_period = s.integer("seasonal_period", cfg.seasonal_period);
            cfg.harmonics = static_cast<int>(s.integer("harmonics", cfg.harmonics));
        } else if (s.name == "sla") {
            cfg.sla_max_rt = s.num("max_rt_ms", cfg.sla_max_rt * 1000.0) / 1000.0;
            if (cfg.sla_max_rt <= 0) throw ConfigError("[sla] max_rt_ms must be > 0");
        } else if (s.name == "profiling") {
            cfg.profiling.out_ratio = s.num("out_ratio", cfg.profiling.out_ratio);
            cfg.profiling.in_ratio = s.num("in_ratio", cfg.profiling.in_ratio);
            if (s.has("notif_rates")) {
                cfg.profiling_notif_rates.clear();
                for (const std::string& v : detail::split_list(s.str("notif_rates", "")))
                    cfg.profiling_notif_rates.push_back(std::strtod(v.c_str(), nullptr));
            }
            cfg.trend_notif_rate = s.num("trend_notif_rate", cfg.trend_notif_rate);
            cfg.profiling_initial_subs = s.num("initial_subs", cfg.profiling_initial_subs);
            cfg.profiling_spec = detail::parse_workload_keys(s, cfg.profiling_spec);
            cfg.profiling_spec.kind = WorkloadKind::profiling_mix;
        } else if (s.name == "run") {
            if (s.has("scenarios")) cfg.scenarios = detail::split_list(s.str("scenarios", ""));
            if (s.has("variants")) cfg.variants = detail::split_list(s.str("variants", ""));
            cfg.seeds = static_cast<int>(s.integer("seeds", cfg.seeds));
            cfg.out_dir = s.str("out_dir", cfg.out_dir);
            if (cfg.seeds < 1) throw ConfigError("[run] seeds must be >= 1");
        } else if (s.name.starts_with("workload ")) {
            const std::string name = detail::trim(s.name.substr(9));
            if (name.empty()) throw ConfigError("workload section needs a name");
            ScenarioConfig sc;
            sc.spec = detail::parse_workload_keys(s, WorkloadSpec{});
            sc.initial_subs = s.num("initial_subs", 0.0);
            cfg.workloads[name] = sc;
        } else {
            throw ConfigError("unknown section [" + s.name + "]");
        }
        s.reject_unconsumed();
    }

    for (const std::string& name : cfg.scenarios) cfg.workload(name); // existence check
    return cfg;
}

inline RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

} // namespace flas
