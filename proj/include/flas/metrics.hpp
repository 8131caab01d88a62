#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "flas/errors.hpp"
#include "flas/rng.hpp"
#include "flas/sim.hpp"

namespace flas {

// One dstat-style sample of low-level resource metrics.
struct MetricSample {
    std::int64_t t = 0;
    double cpu_user = 0.0, cpu_system = 0.0, cpu_idle = 100.0, cpu_wait = 0.0; // percent
    double ctx_switches = 0.0, intr = 0.0;                                     // events/s
    double mem_used = 0.0, mem_free = 0.0, mem_cache = 0.0, mem_buffers = 0.0; // bytes
    double disk_read = 0.0, disk_write = 0.0;                                  // bytes/s
    double net_recv = 0.0, net_send = 0.0;                                     // bytes/s
};

inline constexpr std::array<double MetricSample::*, 14> kMetricChannels = {
    &MetricSample::cpu_user,  &MetricSample::cpu_system,  &MetricSample::cpu_idle,
    &MetricSample::cpu_wait,  &MetricSample::ctx_switches, &MetricSample::intr,
    &MetricSample::mem_used,  &MetricSample::mem_free,    &MetricSample::mem_cache,
    &MetricSample::mem_buffers, &MetricSample::disk_read, &MetricSample::disk_write,
    &MetricSample::net_recv,  &MetricSample::net_send,
};

inline constexpr std::array<const char*, 14> kMetricChannelNames = {
    "cpu_user",  "cpu_system",  "cpu_idle",   "cpu_wait",  "ctx_switches",
    "intr",      "mem_used",    "mem_free",   "mem_cache", "mem_buffers",
    "disk_read", "disk_write",  "net_recv",   "net_send",
};

// Same channels period-averaged, plus the compound memory percentage.
struct CleanSample {
    MetricSample avg;
    double mem_used_pct = 0.0;
    bool outlier_flag = false; // set when some channel fell back to its median
};

struct MetricsParams {
    double noise_sigma = 0.03;   // relative Gaussian noise per channel
    double outlier_prob = 0.005; // chance a channel is replaced by a spike
    double outlier_factor = 5.0;

    double mem_total = 8.0e9;       // bytes
    double mem_base = 8.0e7;        // resident footprint independent of load
    double bytes_per_sub = 2000.0;  // stored-subscription memory cost
    double bytes_per_queued = 2.0e5;// buffered-notification memory cost
    double cache_base = 6.0e8;
    double buffers_base = 1.5e8;

    double ctx_base = 2000.0, ctx_per_notif = 0.8, ctx_per_delivered = 0.5;
    double intr_base = 500.0, intr_per_delivered = 0.3;
    double net_recv_per_notif = 600.0, net_recv_per_sub = 300.0;
    double net_send_per_delivered = 900.0;
    double disk_read_base = 5.0e4, disk_write_base = 1.0e5;
    double wait_pct_per_second = 25.0;  // cpu_wait percent per second of backlog drain time
    double swap_out_per_second = 2.0e7; // disk_write bytes/s per second of backlog drain time
    double swap_in_per_second = 6.0e6;  // disk_read counterpart
};

// Synthesize one metric sample from simulator ground truth. cpu_user tracks
// utilization, context switches and network track message rates, memory
// tracks stored subscriptions plus backlog, and a growing backlog shows up as
// swap traffic on the disk channels. Every channel then gets relative
// Gaussian noise and, rarely, an outlier spike. cpu_idle absorbs whatever the
// other processor shares leave so the four always sum to 100.
inline MetricSample emit_metrics(const SystemState& state, const WorkloadPoint& wp,
                                 const SimParams& sp, const MetricsParams& mp, Rng& rng) {
    const double cap = capacity(state.config, state.stored_subs, sp, state.in_scaling.has_value());
    const double util = cap > 0.0 ? std::min(1.0, wp.notif_rate / cap) : 1.0;
    const double wait_seconds = cap > 0.0 ? state.queue / cap : 0.0;

    MetricSample s;
    s.t = state.t;
    s.cpu_user = 100.0 * util;
    double budget = 100.0 - s.cpu_user;
    s.cpu_system = std::min(0.08 * s.cpu_user, budget);
    budget -= s.cpu_system;
    s.cpu_wait = std::min(mp.wait_pct_per_second * wait_seconds, budget);
    s.ctx_switches = mp.ctx_base + mp.ctx_per_notif * wp.notif_rate +
                     mp.ctx_per_delivered * state.throughput;
    s.intr = mp.intr_base + mp.intr_per_delivered * state.throughput;
    s.mem_used = mp.mem_base + mp.bytes_per_sub * state.stored_subs +
                 mp.bytes_per_queued * state.queue;
    s.mem_cache = mp.cache_base;
    s.mem_buffers = mp.buffers_base;
    s.disk_read = mp.disk_read_base + mp.swap_in_per_second * wait_seconds;
    s.disk_write = mp.disk_write_base + mp.swap_out_per_second * wait_seconds;
    s.net_recv = mp.net_recv_per_notif * wp.notif_rate +
                 mp.net_recv_per_sub * (wp.sub_rate + wp.unsub_rate);
    s.net_send = mp.net_send_per_delivered * state.throughput;

    auto perturb = [&](double v) {
        if (mp.noise_sigma > 0.0) v *= 1.0 + mp.noise_sigma * rng.gaussian();
        if (mp.outlier_prob > 0.0 && rng.uniform01() < mp.outlier_prob) v *= mp.outlier_factor;
        return v;
    };
    s.cpu_user = std::clamp(perturb(s.cpu_user), 0.0, 100.0);
    s.cpu_system = std::clamp(perturb(s.cpu_system), 0.0, 100.0);
    s.cpu_wait = std::clamp(perturb(s.cpu_wait), 0.0, 100.0);
    double busy = s.cpu_user + s.cpu_system + s.cpu_wait;
    if (busy > 100.0) {
        const double f = 100.0 / busy;
        s.cpu_user *= f;
        s.cpu_system *= f;
        s.cpu_wait *= f;
        busy = 100.0;
    }
    s.cpu_idle = 100.0 - busy;

    s.ctx_switches = std::max(0.0, perturb(s.ctx_switches));
    s.intr = std::max(0.0, perturb(s.intr));
    s.mem_used = std::max(0.0, perturb(s.mem_used));
    s.mem_cache = std::max(0.0, perturb(s.mem_cache));
    s.mem_buffers = std::max(0.0, perturb(s.mem_buffers));
    s.mem_free = std::max(0.0, mp.mem_total - s.mem_used - s.mem_cache - s.mem_buffers);
    s.disk_read = std::max(0.0, perturb(s.disk_read));
    s.disk_write = std::max(0.0, perturb(s.disk_write));
    s.net_recv = std::max(0.0, perturb(s.net_recv));
    s.net_send = std::max(0.0, perturb(s.net_send));
    return s;
}

namespace detail {

inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    std::nth_element(v.begin(), v.begin() + n / 2, v.end());
    double med = v[n / 2];
    if (n % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
        med = 0.5 * (med + v[n / 2 - 1]);
    }
    return med;
}

} // namespace detail

// Per-channel outlier removal (median +- outlier_k * MAD; absolute tolerance
// 1e-9 when the MAD collapses to zero) followed by averaging of the samples
// that survive. A channel whose samples are all outliers falls back to its
// median and raises the outlier flag.
inline CleanSample preprocess(std::span<const MetricSample> window, double outlier_k) {
    if (window.empty()) throw EmptyWindow();
    if (outlier_k <= 0.0) throw ConfigError("outlier_k must be > 0");

    CleanSample out;
    out.avg.t = window.back().t;
    std::vector<double> vals(window.size()), devs(window.size());
    for (auto channel : kMetricChannels) {
        for (std::size_t i = 0; i < window.size(); ++i) vals[i] = window[i].*channel;
        std::vector<double> sorted = vals;
        const double med = detail::median_inplace(sorted);
        for (std::size_t i = 0; i < window.size(); ++i) devs[i] = std::abs(vals[i] - med);
        std::vector<double> devs_sorted = devs;
        const double mad = detail::median_inplace(devs_sorted);
        const double threshold = mad > 0.0 ? outlier_k * mad : 1e-9;

        double acc = 0.0;
        std::size_t kept = 0;
        for (std::size_t i = 0; i < window.size(); ++i) {
            if (devs[i] <= threshold) {
                acc += vals[i];
                ++kept;
            }
        }
        if (kept == 0) {
            out.avg.*channel = med;
            out.outlier_flag = true;
        } else {
            out.avg.*channel = acc / static_cast<double>(kept);
        }
    }
    const double total =
        out.avg.mem_used + out.avg.mem_free + out.avg.mem_cache + out.avg.mem_buffers;
    out.mem_used_pct = total > 0.0 ? 100.0 * out.avg.mem_used / total : 0.0;
    return out;
}

// Predictor vector used by the performance models. cpu_idle and the raw
// memory totals are excluded: they are (near-)linear combinations of the
// remaining channels plus the fixed machine size, which makes the normal
// equations ill conditioned and the fitted map fragile outside the training
// regime. mem_used_pct carries the memory signal.
inline constexpr std::array<const char*, 10> kPerfPredictorNames = {
    "cpu_user",  "cpu_system", "cpu_wait", "ctx_switches", "intr",
    "mem_used_pct", "disk_read", "disk_write", "net_recv",  "net_send",
};

inline std::vector<double> perf_predictors(const CleanSample& c) {
    return {c.avg.cpu_user,  c.avg.cpu_system, c.avg.cpu_wait,  c.avg.ctx_switches,
            c.avg.intr,      c.mem_used_pct,   c.avg.disk_read, c.avg.disk_write,
            c.avg.net_recv,  c.avg.net_send};
}

} // namespace flas
