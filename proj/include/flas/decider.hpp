#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "flas/errors.hpp"
#include "flas/forecasters.hpp"
#include "flas/metrics.hpp"
#include "flas/sim.hpp"

namespace flas {

struct DeciderConfig {
    int h = 4;                      // forecast horizon
    int react_w = 2;                // reactive window
    double inc_trend_th = 0.9;      // derivative units (s per s)
    double dec_trend_th = -0.9;
    double react_upper_th = 0.750;  // seconds
    double react_lower_th = 0.010;  // seconds
    int majority = 3;               // forecasts that must cross a trend threshold
    double cooldown_multiplier = 2.0;

    void validate() const {
        if (h < 1) throw ConfigError("decider: h must be >= 1");
        if (majority < 1 || majority > h) throw ConfigError("decider: majority must be in [1, h]");
        if (react_w < 1) throw ConfigError("decider: react_w must be >= 1");
        if (!(dec_trend_th < 0.0) || !(inc_trend_th > 0.0))
            throw ConfigError("decider: need dec_trend_th < 0 < inc_trend_th");
        if (!(0.0 < react_lower_th && react_lower_th < react_upper_th))
            throw ConfigError("decider: need 0 < react_lower_th < react_upper_th");
        if (cooldown_multiplier < 0.0)
            throw ConfigError("decider: cooldown_multiplier must be >= 0");
    }
};

// Response-time estimates accumulated since the last scaling action.
struct EstimateBuffer {
    std::vector<std::pair<std::int64_t, double>> values;

    void append(std::int64_t t, double rt_est) { values.emplace_back(t, rt_est); }
    void clear() { values.clear(); }
};

enum class Verdict { none, scale_out, scale_in };
enum class Trigger { none, proactive, reactive, cooldown };

inline const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::scale_out: return "scale_out";
        case Verdict::scale_in: return "scale_in";
        default: return "none";
    }
}
inline const char* to_string(Trigger t) {
    switch (t) {
        case Trigger::proactive: return "proactive";
        case Trigger::reactive: return "reactive";
        case Trigger::cooldown: return "cooldown";
        default: return "none";
    }
}

struct Decision {
    Verdict verdict = Verdict::none;
    Trigger trigger = Trigger::none;
    std::optional<double> t_sa_pred;
};

// True when at least `majority` of the forecast values exceed the threshold.
inline bool inc_trend(const ForecastVector& forecast, double th, int majority) {
    int count = 0;
    for (double v : forecast.values)
        if (v > th) ++count;
    return count >= majority;
}

inline bool dec_trend(const ForecastVector& forecast, double th, int majority) {
    int count = 0;
    for (double v : forecast.values)
        if (v < th) ++count;
    return count >= majority;
}

// True when the buffer holds at least react_w estimates and the most recent
// react_w of them all exceed the threshold.
inline bool rt_above_th(const EstimateBuffer& buffer, double th, int react_w) {
    if (buffer.values.size() < static_cast<std::size_t>(react_w)) return false;
    for (std::size_t i = buffer.values.size() - react_w; i < buffer.values.size(); ++i)
        if (buffer.values[i].second <= th) return false;
    return true;
}

inline bool rt_below_th(const EstimateBuffer& buffer, double th, int react_w) {
    if (buffer.values.size() < static_cast<std::size_t>(react_w)) return false;
    for (std::size_t i = buffer.values.size() - react_w; i < buffer.values.size(); ++i)
        if (buffer.values[i].second >= th) return false;
    return true;
}

// Quiet period after a scaling action, in ticks.
inline std::int64_t cool_down_time(double t_sa, const DeciderConfig& cfg, double dt) {
    return static_cast<std::int64_t>(std::ceil(cfg.cooldown_multiplier * t_sa / dt));
}

struct DecideResult {
    Decision decision;
    std::int64_t cooldown = 0;
    bool degraded = false; // a forecaster failed; treated as "no action"
};

// Core of the per-tick decision, with the forecast and estimate already
// computed. During cooldown the estimate is still buffered for observability
// but no condition is evaluated. Scale-out is checked before scale-in; within
// each direction the proactive condition is checked before the reactive one.
// On a scaling verdict the buffer is cleared; the caller owns setting the
// cooldown from the measured T_sa of the action it then starts.
inline DecideResult decide_core(std::int64_t t0, const std::optional<ForecastVector>& forecast,
                                double rt_est, EstimateBuffer& buffer, const DeciderConfig& cfg,
                                std::int64_t cooldown) {
    if (cooldown > 0) {
        buffer.append(t0, rt_est);
        Decision d;
        d.trigger = Trigger::cooldown;
        return {d, cooldown - 1, false};
    }
    buffer.append(t0, rt_est);
    if (!forecast) {
        return {Decision{}, 0, true};
    }

    Decision d;
    if (inc_trend(*forecast, cfg.inc_trend_th, cfg.majority)) {
        d.verdict = Verdict::scale_out;
        d.trigger = Trigger::proactive;
    } else if (rt_above_th(buffer, cfg.react_upper_th, cfg.react_w)) {
        d.verdict = Verdict::scale_out;
        d.trigger = Trigger::reactive;
    } else if (dec_trend(*forecast, cfg.dec_trend_th, cfg.majority)) {
        d.verdict = Verdict::scale_in;
        d.trigger = Trigger::proactive;
    } else if (rt_below_th(buffer, cfg.react_lower_th, cfg.react_w)) {
        d.verdict = Verdict::scale_in;
        d.trigger = Trigger::reactive;
    }
    if (d.verdict != Verdict::none) {
        d.t_sa_pred = forecast->t_sa_pred;
        buffer.clear();
    }
    return {d, 0, false};
}

// Full per-tick decision: predict the scaling time, forecast the trend at the
// corresponding offset, estimate the current response time, then evaluate the
// conditions. Forecaster failures degrade to "no action".
inline DecideResult decide(std::int64_t t0, const WorkloadPoint& wp, double stored_subs,
                           EstimateBuffer& buffer, const CleanSample& sample,
                           std::span<const double> trend_history, const ModelSet& models,
                           const DeciderConfig& cfg, std::int64_t cooldown, double dt) {
    const double rt_est = estimate_rt(models.rt_model, sample);
    if (cooldown > 0) return decide_core(t0, std::nullopt, rt_est, buffer, cfg, cooldown);

    std::optional<ForecastVector> forecast;
    try {
        const double t_pred =
            forecast_scaling_time(models.scaling_time, wp.notif_rate, stored_subs, dt);
        forecast = forecast_trend(models.trend, trend_history, t0, t_pred, cfg.h, dt);
    } catch (const Error&) {
        forecast.reset();
    }
    return decide_core(t0, forecast, rt_est, buffer, cfg, cooldown);
}

} // namespace flas
