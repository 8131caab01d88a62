// Command-line front end: profile -> train -> run/evaluate/compare, driven by
// one flat configuration file. All outputs are UTF-8 CSV with \n line
// endings; reruns with identical inputs produce byte-identical files.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "flas/config.hpp"
#include "flas/forecasters.hpp"
#include "flas/report.hpp"
#include "flas/runner.hpp"
#include "flas/textio.hpp"
#include "flas/trace.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNoEvents = 3;
constexpr int kExitFit = 4;
constexpr int kExitRuntime = 5;

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::optional<std::int64_t> seed;
    bool full_precision = false;
};

flas::RunConfig load(const CommonArgs& args) {
    flas::RunConfig cfg;
    try {
        cfg = flas::load_config(args.config_path);
    } catch (const flas::ConfigError&) {
        throw;
    } catch (const flas::Error& e) {
        throw flas::ConfigError(e.what());
    }
    if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
    if (args.seed) cfg.sim.rng_seed = static_cast<std::uint64_t>(*args.seed);
    return cfg;
}

std::string trace_name(const std::string& scenario, const std::string& variant, int seed_idx) {
    return "trace_" + scenario + "_" + variant + "_" + std::to_string(seed_idx) + ".csv";
}
std::string events_name(const std::string& scenario, const std::string& variant, int seed_idx) {
    return "events_" + scenario + "_" + variant + "_" + std::to_string(seed_idx) + ".csv";
}

flas::ModelSet load_models(const std::string& out_dir) {
    flas::ModelSet m;
    m.scaling_time = flas::linear_model_from_text(flas::read_file(out_dir + "/scaling_time.model"));
    m.trend = flas::trend_model_from_text(flas::read_file(out_dir + "/trend.model"));
    m.rt_model = flas::linear_model_from_text(flas::read_file(out_dir + "/perf_rt.model"));
    m.x_model = flas::linear_model_from_text(flas::read_file(out_dir + "/perf_x.model"));
    return m;
}

int cmd_profile(const CommonArgs& args) {
    const flas::RunConfig cfg = load(args);
    fs::create_directories(cfg.out_dir);
    flas::TrainingSets sets;
    try {
        sets = flas::profiling_run(cfg.profiling_scenarios(), cfg.sim, cfg.metrics, cfg.runner,
                                   cfg.profiling, cfg.sim.rng_seed);
    } catch (const flas::NoScalingEventsRecorded& e) {
        std::cerr << "profile: " << e.what() << "\n";
        return kExitNoEvents;
    }
    flas::write_file(cfg.out_dir + "/scaling_times.csv",
                     flas::scaling_times_to_csv(sets.scaling_times));
    flas::write_file(cfg.out_dir + "/rt_series.csv", flas::rt_series_to_csv(sets.rt_series));
    flas::write_file(cfg.out_dir + "/perf_rows.csv", flas::perf_rows_to_csv(sets.perf_rows));
    std::cout << "profile: " << sets.scaling_times.size() << " scaling events, "
              << sets.rt_series.size() << " ticks recorded -> " << cfg.out_dir << "\n";
    return 0;
}

int cmd_train(const CommonArgs& args) {
    const flas::RunConfig cfg = load(args);
    const auto scaling_rows =
        flas::scaling_times_from_csv(flas::read_file(cfg.out_dir + "/scaling_times.csv"));
    const auto rt_series =
        flas::rt_series_from_csv(flas::read_file(cfg.out_dir + "/rt_series.csv"));
    const auto perf_rows =
        flas::perf_rows_from_csv(flas::read_file(cfg.out_dir + "/perf_rows.csv"));

    try {
        const flas::LinearModel scaling = flas::fit_scaling_time(scaling_rows);

        std::vector<std::vector<double>> sx;
        std::vector<double> sy;
        for (const auto& r : scaling_rows) {
            sx.push_back({r.notif_rate, r.stored_subs});
            sy.push_back(r.t_sa);
        }
        const int k = std::min<int>(10, static_cast<int>(sx.size()));
        const flas::CvScore scaling_cv =
            flas::kfold_cv(sx, sy, {"N", "S"}, k, flas::derive_seed(cfg.sim.rng_seed, "kfold"));

        const flas::TrendModel trend =
            flas::fit_trend_model(rt_series, cfg.sim.dt, cfg.seasonal_period,
                                  cfg.runner.sg_window, cfg.runner.sg_degree, cfg.harmonics);

        // Hold out a seeded 20% of the performance rows so the estimation
        // error of the shipped model is measured out of sample.
        std::vector<std::size_t> idx(perf_rows.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        flas::Rng shuffle_rng(flas::derive_seed(cfg.sim.rng_seed, "perf_holdout"));
        for (std::size_t i = idx.size(); i > 1; --i)
            std::swap(idx[i - 1], idx[shuffle_rng.next_u64() % i]);
        const std::size_t train_n = (idx.size() * 4) / 5;
        std::vector<flas::PerfRow> train_rows, holdout_rows;
        for (std::size_t i = 0; i < idx.size(); ++i)
            (i < train_n ? train_rows : holdout_rows).push_back(perf_rows[idx[i]]);

        const flas::PerformanceModels perf = flas::fit_performance_model(train_rows);
        const flas::EstimateErrorStats err =
            flas::estimate_error_stats(perf.rt_model, holdout_rows);

        std::vector<std::vector<double>> px;
        std::vector<double> prt, pxp;
        for (const auto& r : train_rows) {
            if (r.sample.outlier_flag) continue;
            px.push_back(flas::perf_predictors(r.sample));
            prt.push_back(r.rt);
            pxp.push_back(r.throughput);
        }
        const std::vector<std::string> names(flas::kPerfPredictorNames.begin(),
                                             flas::kPerfPredictorNames.end());
        const flas::CvScore rt_cv =
            flas::kfold_cv(px, prt, names, 10, flas::derive_seed(cfg.sim.rng_seed, "kfold"));
        const flas::CvScore x_cv =
            flas::kfold_cv(px, pxp, names, 10, flas::derive_seed(cfg.sim.rng_seed, "kfold"));

        fs::create_directories(cfg.out_dir);
        flas::write_file(cfg.out_dir + "/scaling_time.model", flas::to_text(scaling));
        flas::write_file(cfg.out_dir + "/trend.model", flas::to_text(trend));
        flas::write_file(cfg.out_dir + "/perf_rt.model", flas::to_text(perf.rt_model));
        flas::write_file(cfg.out_dir + "/perf_x.model", flas::to_text(perf.x_model));

        std::string rep;
        rep += "scaling_time: n=" + std::to_string(scaling_rows.size()) +
               " r2=" + flas::detail::csv_num(scaling.r2) +
               " mae=" + flas::detail::csv_num(scaling.mae) +
               " cv_r2=" + flas::detail::csv_num(scaling_cv.r2) +
               " cv_mae=" + flas::detail::csv_num(scaling_cv.mae) + "\n";
        rep += std::string("trend: kind=") + flas::to_string(trend.kind) +
               " cv_mae=" + flas::detail::csv_num(trend.cv_mae) +
               " ar1=" + flas::detail::csv_num(trend.ar1) +
               " ar2=" + flas::detail::csv_num(trend.ar2) + "\n";
        rep += "perf_rt: r2=" + flas::detail::csv_num(perf.rt_model.r2) +
               " mae=" + flas::detail::csv_num(perf.rt_model.mae) +
               " cv_r2=" + flas::detail::csv_num(rt_cv.r2) +
               " cv_mae=" + flas::detail::csv_num(rt_cv.mae) + "\n";
        rep += "perf_x: r2=" + flas::detail::csv_num(perf.x_model.r2) +
               " mae=" + flas::detail::csv_num(perf.x_model.mae) +
               " cv_r2=" + flas::detail::csv_num(x_cv.r2) +
               " cv_mae=" + flas::detail::csv_num(x_cv.mae) + "\n";
        rep += "rt_estimate_holdout: p50=" + flas::detail::csv_num(100 * err.p50) +
               "% p90=" + flas::detail::csv_num(100 * err.p90) +
               "% p99=" + flas::detail::csv_num(100 * err.p99) +
               "% max=" + flas::detail::csv_num(100 * err.max) + "%\n";
        rep += "kpi_ranking_rt:";
        for (const auto& [name, score] : flas::kpi_ranking(perf.rt_model, px))
            rep += " " + name + "=" + flas::detail::csv_num(score);
        rep += "\nkpi_ranking_x:";
        for (const auto& [name, score] : flas::kpi_ranking(perf.x_model, px))
            rep += " " + name + "=" + flas::detail::csv_num(score);
        rep += "\n";
        flas::write_file(cfg.out_dir + "/fit_report.txt", rep);
        std::cout << rep;
    } catch (const flas::ConfigError&) {
        throw;
    } catch (const flas::Error& e) {
        std::cerr << "train: model fit failed: " << e.what() << "\n";
        return kExitFit;
    }
    return 0;
}

int run_tuples(const flas::RunConfig& cfg,
               const std::vector<std::pair<std::string, std::string>>& tuples,
               bool full_precision) {
    std::optional<flas::ModelSet> models;
    fs::create_directories(cfg.out_dir);
    for (const auto& [scenario, variant_name] : tuples) {
        const flas::Variant variant = flas::variant_from_string(variant_name);
        const flas::ScenarioConfig& sc = cfg.workload(scenario);
        const bool needs_models = variant == flas::Variant::flas ||
                                  variant == flas::Variant::proactive_only ||
                                  variant == flas::Variant::reactive_only;
        if (needs_models && !models) models = load_models(cfg.out_dir);

        flas::RunnerParams rp = cfg.runner;
        rp.initial_subs = sc.initial_subs;
        for (int s = 0; s < cfg.seeds; ++s) {
            const std::uint64_t run_seed =
                flas::derive_seed(cfg.sim.rng_seed, "run/" + scenario + "/" + variant_name + "/" +
                                                        std::to_string(s));
            const flas::RunTrace trace =
                flas::run_scenario(sc.spec, variant, models ? &*models : nullptr, cfg.sim,
                                   cfg.metrics, rp, cfg.decider, run_seed);
            flas::write_file(cfg.out_dir + "/" + trace_name(scenario, variant_name, s),
                             flas::trace_to_csv(trace, full_precision));
            flas::write_file(cfg.out_dir + "/" + events_name(scenario, variant_name, s),
                             flas::events_to_csv(trace));
        }
        std::cout << "run: " << scenario << "/" << variant_name << " x " << cfg.seeds
                  << " seeds -> " << cfg.out_dir << "\n";
    }
    return 0;
}

int cmd_run(const CommonArgs& args, const std::string& scenario, const std::string& variant,
            bool all) {
    const flas::RunConfig cfg = load(args);
    std::vector<std::pair<std::string, std::string>> tuples;
    if (all) {
        for (const std::string& sc : cfg.scenarios)
            for (const std::string& v : cfg.variants) tuples.emplace_back(sc, v);
    } else {
        if (scenario.empty() || variant.empty())
            throw flas::ConfigError("run needs --scenario and --variant (or --all)");
        tuples.emplace_back(scenario, variant);
    }
    return run_tuples(cfg, tuples, args.full_precision);
}

int cmd_evaluate(const CommonArgs& args) {
    const flas::RunConfig cfg = load(args);
    std::vector<flas::EvaluationReport> reports;
    for (const std::string& scenario : cfg.scenarios) {
        const flas::ScenarioConfig& sc = cfg.workload(scenario);
        const flas::DemandSchedule schedule =
            flas::demand_points(sc.spec, sc.initial_subs, cfg.sim, cfg.sla_max_rt);
        for (const std::string& variant : cfg.variants) {
            double over = 0, under = 0, sla = 0;
            double sum_ti = 0, sum_to = 0, sum_ei = 0, sum_eo = 0;
            int n_ti = 0, n_to = 0, n_out = 0, n_in = 0, found = 0;
            for (int s = 0; s < cfg.seeds; ++s) {
                const std::string tpath = cfg.out_dir + "/" + trace_name(scenario, variant, s);
                if (!fs::exists(tpath)) continue;
                flas::RunTrace trace = flas::trace_from_csv(flas::read_file(tpath));
                trace.events = flas::events_from_csv(
                    flas::read_file(cfg.out_dir + "/" + events_name(scenario, variant, s)));
                const flas::EvaluationReport r =
                    flas::evaluate_trace(trace, schedule, cfg.sla_max_rt, cfg.sim.dt);
                over += r.over_provisioning_pct;
                under += r.under_provisioning_pct;
                sla += r.sla_violation_pct;
                if (r.scaling.avg_t_scale_in) {
                    sum_ti += *r.scaling.avg_t_scale_in;
                    sum_ei += *r.scaling.rel_err_scale_in_pct;
                    ++n_ti;
                }
                if (r.scaling.avg_t_scale_out) {
                    sum_to += *r.scaling.avg_t_scale_out;
                    sum_eo += *r.scaling.rel_err_scale_out_pct;
                    ++n_to;
                }
                n_out += r.scaling.n_scale_out;
                n_in += r.scaling.n_scale_in;
                ++found;
            }
            if (found == 0) continue;
            flas::EvaluationReport mean;
            mean.scenario = scenario;
            mean.variant = variant;
            mean.over_provisioning_pct = over / found;
            mean.under_provisioning_pct = under / found;
            mean.sla_violation_pct = sla / found;
            if (n_ti > 0) {
                mean.scaling.avg_t_scale_in = sum_ti / n_ti;
                mean.scaling.rel_err_scale_in_pct = sum_ei / n_ti;
            }
            if (n_to > 0) {
                mean.scaling.avg_t_scale_out = sum_to / n_to;
                mean.scaling.rel_err_scale_out_pct = sum_eo / n_to;
            }
            mean.scaling.n_scale_out = n_out;
            mean.scaling.n_scale_in = n_in;
            reports.push_back(mean);
        }
    }
    if (reports.empty())
        throw flas::Error("evaluate: no trace files found in " + cfg.out_dir +
                          " for the configured scenarios/variants; run `flas run` first");
    flas::write_file(cfg.out_dir + "/report.csv", flas::reports_to_csv(reports));
    std::cout << flas::reports_to_csv(reports);
    return 0;
}

int cmd_compare(const CommonArgs& args) {
    const flas::RunConfig cfg = load(args);
    std::vector<flas::ScenarioUnderTest> scenarios;
    for (const std::string& name : cfg.scenarios) scenarios.push_back(cfg.workload(name));
    std::vector<flas::Variant> variants;
    for (const std::string& v : cfg.variants) variants.push_back(flas::variant_from_string(v));

    std::optional<flas::ModelSet> models;
    for (flas::Variant v : variants)
        if (v == flas::Variant::flas || v == flas::Variant::proactive_only ||
            v == flas::Variant::reactive_only) {
            models = load_models(cfg.out_dir);
            break;
        }

    const std::vector<flas::ComparisonCell> cells =
        flas::compare(scenarios, variants, models ? &*models : nullptr, cfg.sim, cfg.metrics,
                      cfg.runner, cfg.decider, cfg.sla_max_rt, cfg.seeds, cfg.sim.rng_seed);

    fs::create_directories(cfg.out_dir);
    flas::write_file(cfg.out_dir + "/comparison.csv", flas::comparison_to_csv(cells));

    std::string txt;
    for (const flas::ComparisonCell& c : cells) {
        txt += c.scenario + " / " + c.variant + ": ";
        if (c.ok) {
            txt += "sla_violation=" + flas::detail::csv_num(c.mean_sla_violation_pct) +
                   "% over_provisioning=" + flas::detail::csv_num(c.mean_over_provisioning_pct) +
                   "% under_provisioning=" +
                   flas::detail::csv_num(c.mean_under_provisioning_pct) + "%";
        } else {
            txt += "FAILED: " + c.error;
        }
        txt += "\n";
    }
    flas::write_file(cfg.out_dir + "/comparison.txt", txt);
    std::cout << txt;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"simulated pub/sub service with a combined proactive/reactive auto-scaler"};
    app.require_subcommand(1);

    CommonArgs args;
    std::string scenario, variant;
    bool all = false;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", args.config_path, "configuration file")->required();
        cmd->add_option("--out", args.out_dir, "output directory (overrides [run] out_dir)");
        cmd->add_option("--seed", args.seed, "master seed (overrides [sim] seed)");
        cmd->add_flag("--full-precision", args.full_precision,
                      "add full-precision response-time columns to trace CSVs");
    };

    CLI::App* profile = app.add_subcommand("profile", "collect training data");
    add_common(profile);
    CLI::App* train = app.add_subcommand("train", "fit the forecasting models");
    add_common(train);
    CLI::App* run = app.add_subcommand("run", "run a scenario under an auto-scaler variant");
    add_common(run);
    run->add_option("--scenario", scenario, "workload section name");
    run->add_option("--variant", variant, "flas|proactive_only|reactive_only|cpu_threshold|no_scaling");
    run->add_flag("--all", all, "run every configured (scenario, variant) pair");
    CLI::App* evaluate = app.add_subcommand("evaluate", "aggregate metrics from trace files");
    add_common(evaluate);
    CLI::App* compare = app.add_subcommand("compare", "compare auto-scaler variants");
    add_common(compare);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitConfig;
    }

    try {
        if (profile->parsed()) return cmd_profile(args);
        if (train->parsed()) return cmd_train(args);
        if (run->parsed()) return cmd_run(args, scenario, variant, all);
        if (evaluate->parsed()) return cmd_evaluate(args);
        if (compare->parsed()) return cmd_compare(args);
    } catch (const flas::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const flas::NoScalingEventsRecorded& e) {
        std::cerr << e.what() << "\n";
        return kExitNoEvents;
    } catch (const flas::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
