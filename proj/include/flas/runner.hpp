#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "flas/decider.hpp"
#include "flas/errors.hpp"
#include "flas/forecasters.hpp"
#include "flas/metrics.hpp"
#include "flas/rng.hpp"
#include "flas/sim.hpp"
#include "flas/trace.hpp"
#include "flas/workload.hpp"

namespace flas {

enum class Variant { flas, proactive_only, reactive_only, cpu_threshold, no_scaling };

inline const char* to_string(Variant v) {
    switch (v) {
        case Variant::flas: return "flas";
        case Variant::proactive_only: return "proactive_only";
        case Variant::reactive_only: return "reactive_only";
        case Variant::cpu_threshold: return "cpu_threshold";
        case Variant::no_scaling: return "no_scaling";
    }
    return "?";
}

inline Variant variant_from_string(const std::string& s) {
    if (s == "flas") return Variant::flas;
    if (s == "proactive_only") return Variant::proactive_only;
    if (s == "reactive_only") return Variant::reactive_only;
    if (s == "cpu_threshold") return Variant::cpu_threshold;
    if (s == "no_scaling") return Variant::no_scaling;
    throw ConfigError("unknown variant: " + s);
}

// Online-pipeline knobs shared by the auto-scaling and profiling phases.
struct RunnerParams {
    int metrics_window = 3;  // rolling preprocessing window (samples)
    double outlier_k = 3.0;  // MAD multiplier for outlier removal
    int sg_window = 11;
    int sg_degree = 2;
    double initial_subs = 0.0;
};

namespace detail {

// Rolling estimate pipeline: raw samples in, preprocessed sample and the
// smoothed derivative of the response-time estimates out.
class OnlineSmoother {
public:
    OnlineSmoother(int sg_window, int sg_degree, double dt)
        : sg_window_(sg_window), sg_degree_(sg_degree), dt_(dt) {}

    // Feed this tick's estimate; returns the smoothed derivative at the tick.
    double push(double rt_est) {
        est_.push_back(rt_est);
        const std::size_t keep = static_cast<std::size_t>(sg_window_) + 2;
        if (est_.size() > keep) est_.pop_front();
        if (est_.size() < 2) {
            history_.push_back(0.0);
            return 0.0;
        }
        const std::vector<double> tail(est_.begin(), est_.end());
        const std::vector<double> d = first_derivative(tail, dt_);
        int w = std::min<int>(sg_window_, static_cast<int>(d.size()));
        if (w % 2 == 0) --w;
        w = std::max(w, 1);
        const int deg = std::min(sg_degree_, w - 1);
        const std::vector<double> sm = savgol_filter(d, w, deg);
        history_.push_back(sm.back());
        return sm.back();
    }

    std::span<const double> history() const { return history_; }

private:
    int sg_window_;
    int sg_degree_;
    double dt_;
    std::deque<double> est_;
    std::vector<double> history_;
};

} // namespace detail

// Run one scenario under one auto-scaler variant. The flas/proactive_only/
// reactive_only variants need fitted models; cpu_threshold and no_scaling do
// not. Identical inputs produce identical traces.
inline RunTrace run_scenario(const WorkloadSpec& spec, Variant variant, const ModelSet* models,
                             const SimParams& sp, const MetricsParams& mp, const RunnerParams& rp,
                             const DeciderConfig& dc, std::uint64_t run_seed) {
    dc.validate();
    const bool needs_models = variant == Variant::flas || variant == Variant::proactive_only ||
                              variant == Variant::reactive_only;
    if (needs_models && models == nullptr)
        throw ConfigError(std::string(to_string(variant)) + " requires fitted models");

    // Variants disable one half of the decider via thresholds no value can
    // cross; the evaluation order itself stays identical.
    DeciderConfig cfg = dc;
    constexpr double kInf = std::numeric_limits<double>::infinity();
    if (variant == Variant::proactive_only) {
        cfg.react_upper_th = kInf;
        cfg.react_lower_th = -kInf;
    } else if (variant == Variant::reactive_only) {
        cfg.inc_trend_th = kInf;
        cfg.dec_trend_th = -kInf;
    }

    const std::vector<WorkloadPoint> series = generate(spec);
    SystemState state = initial_state(sp, rp.initial_subs);
    Rng sim_rng(derive_seed(run_seed, "sim"));
    Rng met_rng(derive_seed(run_seed, "metrics"));

    RunTrace trace;
    trace.rows.reserve(series.size());
    EstimateBuffer buffer;
    detail::OnlineSmoother smoother(rp.sg_window, rp.sg_degree, sp.dt);
    std::deque<MetricSample> window;
    std::int64_t cooldown = 0;
    int cpu_above = 0, cpu_below = 0;

    for (const WorkloadPoint& wp : series) {
        state = step(state, wp, sp);

        MetricSample raw = emit_metrics(state, wp, sp, mp, met_rng);
        window.push_back(raw);
        if (window.size() > static_cast<std::size_t>(rp.metrics_window)) window.pop_front();
        const std::vector<MetricSample> win(window.begin(), window.end());
        const CleanSample clean = preprocess(win, rp.outlier_k);

        Decision decision;
        double rt_est = 0.0;
        if (needs_models) {
            rt_est = estimate_rt(models->rt_model, clean);
            smoother.push(rt_est);
            const DecideResult res = decide(state.t, wp, state.stored_subs, buffer, clean,
                                            smoother.history(), *models, cfg, cooldown, sp.dt);
            decision = res.decision;
            cooldown = res.cooldown;
        } else if (variant == Variant::cpu_threshold) {
            // Plain threshold rules on CPU usage: scale out above 80% for
            // more than two monitoring periods, scale in below 40% likewise,
            // with the same cooldown policy as the other variants.
            if (cooldown > 0) {
                --cooldown;
                decision.trigger = Trigger::cooldown;
            } else {
                if (clean.avg.cpu_user > 80.0) {
                    ++cpu_above;
                    cpu_below = 0;
                } else if (clean.avg.cpu_user < 40.0) {
                    ++cpu_below;
                    cpu_above = 0;
                } else {
                    cpu_above = cpu_below = 0;
                }
                if (cpu_above > 2) {
                    decision.verdict = Verdict::scale_out;
                    decision.trigger = Trigger::reactive;
                    cpu_above = 0;
                } else if (cpu_below > 2) {
                    decision.verdict = Verdict::scale_in;
                    decision.trigger = Trigger::reactive;
                    cpu_below = 0;
                }
            }
        }

        std::int64_t event_id = -1;
        if (decision.verdict != Verdict::none) {
            const ScaleKind kind = decision.verdict == Verdict::scale_out ? ScaleKind::scale_out
                                                                          : ScaleKind::scale_in;
            const bool executable =
                !state.in_scaling &&
                (kind == ScaleKind::scale_out || state.config.matcher_instances > 1);
            if (executable) {
                const double predicted = decision.t_sa_pred.value_or(0.0);
                state = begin_scaling(state, kind, predicted, wp, sp, sim_rng);
                trace.events.push_back(*state.in_scaling);
                event_id = static_cast<std::int64_t>(trace.events.size()) - 1;
                cooldown = cool_down_time(state.in_scaling->t_actual, dc, sp.dt);
            } else {
                // Verdict recorded but not executable (already at one matcher
                // or mid-scaling); still start a quiet period so the decision
                // does not repeat every tick.
                cooldown = cool_down_time(decision.t_sa_pred.value_or(sp.dt), dc, sp.dt);
            }
        }

        TraceRow row;
        row.t = state.t;
        row.notif_rate = wp.notif_rate;
        row.sub_rate = wp.sub_rate;
        row.stored_subs = state.stored_subs;
        row.matchers = state.config.matcher_instances;
        row.queue = state.queue;
        row.rt = state.rt;
        row.rt_est = rt_est;
        row.throughput = state.throughput;
        row.cooldown = cooldown;
        row.decision = decision.verdict;
        row.trigger = decision.trigger;
        row.event_id = event_id;
        trace.rows.push_back(row);
    }
    return trace;
}

// Workload-threshold scaling rules used while collecting training data. The
// out threshold sits deliberately past the saturation point so the profiling
// traces show fully developed response-time ramps.
struct ProfilingThresholds {
    double out_ratio = 1.35; // scale out when arrivals exceed this fraction of capacity
    double in_ratio = 0.45;  // scale in when they fall below this fraction
};

struct ProfilingScenario {
    WorkloadSpec spec;
    double initial_subs = 0.0;
    // Scenarios at off-nominal notification rates diversify the scaling-time
    // and performance samples but would blur the seasonal trend fit.
    bool use_for_trend = true;
};

// Profiling phase: run every scenario under simple reactive workload-threshold
// scaling and record, per tick, the resource metrics with the measured
// performance, the response-time series, and (N, S, T_sa) for every scaling
// action triggered.
inline TrainingSets profiling_run(const std::vector<ProfilingScenario>& scenarios,
                                  const SimParams& sp, const MetricsParams& mp,
                                  const RunnerParams& rp, const ProfilingThresholds& th,
                                  std::uint64_t seed) {
    if (scenarios.empty()) throw ConfigError("profiling needs at least one scenario");

    TrainingSets sets;
    std::int64_t t_global = 0;
    for (std::size_t si = 0; si < scenarios.size(); ++si) {
        const std::vector<WorkloadPoint> series = generate(scenarios[si].spec);
        SystemState state = initial_state(sp, scenarios[si].initial_subs);
        const std::uint64_t run_seed = derive_seed(seed, "profile/" + std::to_string(si));
        Rng sim_rng(derive_seed(run_seed, "sim"));
        Rng met_rng(derive_seed(run_seed, "metrics"));
        std::deque<MetricSample> window;
        std::deque<double> rt_window, x_window;
        std::int64_t cooldown = 0;

        for (const WorkloadPoint& wp : series) {
            state = step(state, wp, sp);
            MetricSample raw = emit_metrics(state, wp, sp, mp, met_rng);
            window.push_back(raw);
            rt_window.push_back(state.rt);
            x_window.push_back(state.throughput);
            if (window.size() > static_cast<std::size_t>(rp.metrics_window)) {
                window.pop_front();
                rt_window.pop_front();
                x_window.pop_front();
            }
            const std::vector<MetricSample> win(window.begin(), window.end());
            const CleanSample clean = preprocess(win, rp.outlier_k);

            // Performance targets are averaged over the same sampling period
            // as the resource metrics they are paired with.
            double rt_avg = 0.0, x_avg = 0.0;
            for (double v : rt_window) rt_avg += v;
            for (double v : x_window) x_avg += v;
            rt_avg /= static_cast<double>(rt_window.size());
            x_avg /= static_cast<double>(x_window.size());

            ++t_global;
            if (scenarios[si].use_for_trend) sets.rt_series.emplace_back(t_global, rt_avg);
            sets.perf_rows.push_back({clean, rt_avg, x_avg});

            if (cooldown > 0) {
                --cooldown;
            } else if (!state.in_scaling) {
                const double cap = capacity(state.config, state.stored_subs, sp, false);
                const double ratio = cap > 0.0 ? wp.notif_rate / cap : 2.0;
                std::optional<ScaleKind> kind;
                if (ratio > th.out_ratio)
                    kind = ScaleKind::scale_out;
                else if (ratio < th.in_ratio && state.config.matcher_instances > 1)
                    kind = ScaleKind::scale_in;
                if (kind) {
                    state = begin_scaling(state, *kind, 0.0, wp, sp, sim_rng);
                    sets.scaling_times.push_back(
                        {wp.notif_rate, state.stored_subs, state.in_scaling->t_actual});
                    cooldown = static_cast<std::int64_t>(
                        std::ceil(2.0 * state.in_scaling->t_actual / sp.dt));
                }
            }
        }
        // Advance to the next period boundary so every scenario starts with
        // the same seasonal phase (tick 1 modulo period).
        const std::int64_t p = scenarios[si].spec.period;
        if (p > 0 && t_global % p != 0) t_global += p - t_global % p;
    }
    if (sets.scaling_times.empty()) throw NoScalingEventsRecorded();
    return sets;
}

} // namespace flas
