#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "flas/errors.hpp"
#include "flas/rng.hpp"
#include "flas/sim.hpp"

namespace flas {

enum class WorkloadKind {
    stationary_peak,
    nonstationary_peak,
    steady_increase,
    isolated_spike,
    spike_train,
    profiling_mix,
};

inline const char* to_string(WorkloadKind k) {
    switch (k) {
        case WorkloadKind::stationary_peak: return "stationary_peak";
        case WorkloadKind::nonstationary_peak: return "nonstationary_peak";
        case WorkloadKind::steady_increase: return "steady_increase";
        case WorkloadKind::isolated_spike: return "isolated_spike";
        case WorkloadKind::spike_train: return "spike_train";
        case WorkloadKind::profiling_mix: return "profiling_mix";
    }
    return "?";
}

inline WorkloadKind workload_kind_from_string(const std::string& s) {
    if (s == "stationary_peak") return WorkloadKind::stationary_peak;
    if (s == "nonstationary_peak") return WorkloadKind::nonstationary_peak;
    if (s == "steady_increase") return WorkloadKind::steady_increase;
    if (s == "isolated_spike") return WorkloadKind::isolated_spike;
    if (s == "spike_train") return WorkloadKind::spike_train;
    if (s == "profiling_mix") return WorkloadKind::profiling_mix;
    throw InvalidSpec("unknown workload kind: " + s);
}

struct WorkloadSpec {
    WorkloadKind kind = WorkloadKind::stationary_peak;
    std::int64_t duration = 600; // ticks
    std::uint64_t seed = 1;
    double base_sub_rate = 0.0;  // steady churn level (subs/s in and out)
    double peak_sub_rate = 0.0;  // wave or spike amplitude
    std::int64_t period = 150;   // seasonal kinds
    double ramp = 0.0;           // sub-rate growth per tick^2 (steady_increase)
    std::int64_t spike_width = 1;
    int spike_count = 5;
    double notif_rate = 10000.0;
};

namespace detail {

// Raised-cosine bump over [start, start+width): 0 -> amp -> 0.
inline double cosine_bump(std::int64_t t, std::int64_t start, std::int64_t width, double amp) {
    if (t < start || t >= start + width) return 0.0;
    const double x = static_cast<double>(t - start) / static_cast<double>(width);
    return amp * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * x));
}

inline void validate_spec(const WorkloadSpec& s) {
    if (s.duration <= 0) throw InvalidSpec("duration must be > 0");
    if (s.peak_sub_rate < 0 || s.base_sub_rate < 0 || s.notif_rate < 0)
        throw InvalidSpec("rates must be >= 0");
    if (s.peak_sub_rate > 0 && s.peak_sub_rate < s.base_sub_rate)
        throw InvalidSpec("peak_sub_rate must be >= base_sub_rate");
    const bool seasonal =
        s.kind == WorkloadKind::stationary_peak || s.kind == WorkloadKind::profiling_mix;
    if (seasonal && s.period > s.duration / 2)
        throw InvalidSpec("seasonal workloads need period <= duration/2");
    if (s.kind == WorkloadKind::spike_train && (s.spike_width < 1 || s.spike_count < 1))
        throw InvalidSpec("spike_train needs spike_width >= 1 and spike_count >= 1");
}

// One period of the subscription wave: a smooth rise to the peak rate and a
// matching unsubscription wave half a period later, on top of neutral churn.
inline void peak_pair(std::vector<WorkloadPoint>& out, std::int64_t start, std::int64_t period,
                      double base, double peak) {
    const std::int64_t width = std::max<std::int64_t>(2, period / 4);
    for (std::int64_t i = 0; i < period; ++i) {
        const std::int64_t t = start + i;
        if (t < 1 || t > static_cast<std::int64_t>(out.size())) continue;
        WorkloadPoint& wp = out[t - 1];
        wp.sub_rate += cosine_bump(i, period / 8, width, peak - base);
        wp.unsub_rate += cosine_bump(i, period / 8 + period / 2, width, peak - base);
    }
}

} // namespace detail

// Deterministic workload series; ticks run 1..duration. The stored
// subscription count follows by integrating sub_rate - unsub_rate.
inline std::vector<WorkloadPoint> generate(const WorkloadSpec& spec) {
    detail::validate_spec(spec);

    std::vector<WorkloadPoint> out(spec.duration);
    for (std::int64_t t = 1; t <= spec.duration; ++t) {
        out[t - 1].t = t;
        out[t - 1].notif_rate = spec.notif_rate;
        out[t - 1].sub_rate = spec.base_sub_rate;
        out[t - 1].unsub_rate = spec.base_sub_rate;
    }

    switch (spec.kind) {
        case WorkloadKind::stationary_peak: {
            for (std::int64_t start = 1; start <= spec.duration; start += spec.period)
                detail::peak_pair(out, start, spec.period, spec.base_sub_rate,
                                  spec.peak_sub_rate);
            break;
        }
        case WorkloadKind::nonstationary_peak: {
            Rng rng(spec.seed);
            const std::int64_t latest = std::max<std::int64_t>(1, spec.duration - spec.period);
            const auto start =
                1 + static_cast<std::int64_t>(rng.uniform01() * static_cast<double>(latest));
            detail::peak_pair(out, start, spec.period, spec.base_sub_rate, spec.peak_sub_rate);
            break;
        }
        case WorkloadKind::steady_increase: {
            // Constant (optionally ramping) subscription inflow, no churn,
            // halted once the stored count would exceed 100k.
            double cumulative = 0.0;
            for (std::int64_t t = 1; t <= spec.duration; ++t) {
                WorkloadPoint& wp = out[t - 1];
                wp.unsub_rate = 0.0;
                const double rate =
                    spec.base_sub_rate + spec.ramp * static_cast<double>(t - 1);
                wp.sub_rate = cumulative < 100000.0 ? rate : 0.0;
                cumulative += wp.sub_rate;
            }
            break;
        }
        case WorkloadKind::isolated_spike: {
            // One single-tick spike; the extra subscriptions leave again over
            // the following three ticks.
            const std::int64_t ts = spec.duration / 2;
            const double extra = spec.peak_sub_rate - spec.base_sub_rate;
            out[ts - 1].sub_rate = spec.peak_sub_rate;
            for (std::int64_t k = 1; k <= 3; ++k)
                if (ts + k <= spec.duration) out[ts + k - 1].unsub_rate += extra / 3.0;
            break;
        }
        case WorkloadKind::spike_train: {
            // spike_count square pulses separated by spike_width gaps; the
            // added subscriptions drain during and after the train.
            const std::int64_t cycle = 2 * spec.spike_width;
            const std::int64_t train = spec.spike_count * cycle;
            const std::int64_t start = std::max<std::int64_t>(1, spec.duration / 3);
            const double extra = spec.peak_sub_rate - spec.base_sub_rate;
            for (int s = 0; s < spec.spike_count; ++s) {
                for (std::int64_t i = 0; i < spec.spike_width; ++i) {
                    const std::int64_t t = start + s * cycle + i;
                    if (t <= spec.duration) out[t - 1].sub_rate = spec.peak_sub_rate;
                }
            }
            // Return to the baseline: spread the accumulated extra over the
            // train tail and the same span after it.
            const double added = extra * static_cast<double>(spec.spike_width * spec.spike_count);
            const std::int64_t drain_span = train;
            for (std::int64_t i = 0; i < drain_span; ++i) {
                const std::int64_t t = start + train / 2 + i;
                if (t <= spec.duration) out[t - 1].unsub_rate += added / drain_span;
            }
            break;
        }
        case WorkloadKind::profiling_mix: {
            // Concatenated scaled variants of the other kinds, for training
            // diversity: seasonal peaks of two amplitudes, a steady ramp and
            // a spike train, cycled to fill the duration. Segment lengths are
            // multiples of the period so the seasonal phase stays aligned.
            const std::int64_t seg = spec.period * 2;
            std::int64_t t = 1;
            int block = 0;
            while (t <= spec.duration) {
                const std::int64_t len = std::min<std::int64_t>(seg, spec.duration - t + 1);
                switch (block % 3) {
                    case 0:
                        detail::peak_pair(out, t, spec.period, spec.base_sub_rate,
                                          spec.peak_sub_rate);
                        if (len > spec.period)
                            detail::peak_pair(out, t + spec.period, spec.period,
                                              spec.base_sub_rate, spec.peak_sub_rate);
                        break;
                    case 1:
                        detail::peak_pair(out, t, spec.period, spec.base_sub_rate,
                                          0.65 * spec.peak_sub_rate);
                        if (len > spec.period)
                            detail::peak_pair(out, t + spec.period, spec.period,
                                              spec.base_sub_rate, 1.25 * spec.peak_sub_rate);
                        break;
                    case 2: {
                        // Square spikes on top of the churn, drained in place.
                        const std::int64_t w = std::max<std::int64_t>(1, spec.period / 16);
                        for (std::int64_t i = 0; i + 4 * w < len; i += 6 * w) {
                            for (std::int64_t j = 0; j < w; ++j) {
                                const std::int64_t tt = t + i + j;
                                if (tt <= spec.duration)
                                    out[tt - 1].sub_rate += 0.9 * spec.peak_sub_rate;
                            }
                            for (std::int64_t j = 0; j < 3 * w; ++j) {
                                const std::int64_t tt = t + i + w + j;
                                if (tt <= spec.duration)
                                    out[tt - 1].unsub_rate += 0.3 * spec.peak_sub_rate;
                            }
                        }
                        break;
                    }
                }
                t += len;
                ++block;
            }
            break;
        }
    }
    return out;
}

} // namespace flas
