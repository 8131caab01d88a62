#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>

#include "flas/errors.hpp"
#include "flas/rng.hpp"

namespace flas {

// Operator instance counts of the simulated service. Only the matcher layer
// scales; access and exit points stay at one instance. Matcher counts are
// powers of two because every scaling action doubles or halves them.
struct ServiceConfig {
    int ap_instances = 1;
    int matcher_instances = 1;
    int ep_instances = 1;

    friend bool operator==(const ServiceConfig&, const ServiceConfig&) = default;
};

struct SimParams {
    double mu0 = 20000.0;                // messages/s one matcher sustains with no subscriptions
    double kappa = 1.2e-5;               // capacity degradation per stored subscription
    double base_service_time = 0.0075;   // seconds to match one message at zero load
    double scaling_overhead_factor = 0.9; // capacity multiplier while state is repartitioned
    double t_a0 = 0.8;                   // ground-truth scaling time: seconds
    double t_a1 = 2.0e-5;                // ... seconds per notification/s
    double t_a2 = 4.0e-6;                // ... seconds per stored subscription
    double t_noise = 0.05;               // relative half-width of the seeded scaling-time noise
    double dt = 1.0;                     // tick length in seconds
    std::uint64_t rng_seed = 42;
};

enum class ScaleKind { scale_out, scale_in };

inline const char* to_string(ScaleKind k) {
    return k == ScaleKind::scale_out ? "scale_out" : "scale_in";
}

// One scaling action. tp is the tick it was triggered, rp the tick the new
// configuration takes effect; t_actual = (rp - tp) * dt.
struct ScalingEvent {
    ScaleKind kind = ScaleKind::scale_out;
    std::int64_t tp = 0;
    std::int64_t rp = 0;
    double t_actual = 0.0;
    double t_predicted = 0.0;
    ServiceConfig config_before;
    ServiceConfig config_after;
};

struct WorkloadPoint {
    std::int64_t t = 0;
    double notif_rate = 0.0;  // notifications/s
    double sub_rate = 0.0;    // subscriptions/s arriving
    double unsub_rate = 0.0;  // subscriptions/s leaving
};

struct SystemState {
    std::int64_t t = 0;
    ServiceConfig config;
    double stored_subs = 0.0;
    double queue = 0.0;       // backlogged messages
    double rt = 0.0;          // seconds
    double throughput = 0.0;  // messages/s
    bool saturated = false;
    std::optional<ScalingEvent> in_scaling;
    // Set by step() for exactly the tick on which an event's rp fell.
    std::optional<ScalingEvent> last_completed;
};

// Aggregate processing capacity in messages/s. Content-based matching slows
// down as subscriptions accumulate, and repartitioning state during a scaling
// action costs a fixed fraction of capacity.
inline double capacity(const ServiceConfig& config, double stored_subs, const SimParams& p,
                       bool scaling_active) {
    double c = config.matcher_instances * p.mu0 / (1.0 + p.kappa * stored_subs);
    if (scaling_active) c *= p.scaling_overhead_factor;
    return c;
}

// Per-message service time. Each matcher holds an equal share of the stored
// subscriptions, so the matching cost per message grows with subs/matchers.
inline double service_time(const ServiceConfig& config, double stored_subs, const SimParams& p) {
    return p.base_service_time * (1.0 + p.kappa * stored_subs / config.matcher_instances);
}

inline SystemState initial_state(const SimParams& p, double initial_subs = 0.0,
                                 ServiceConfig config = {}) {
    SystemState s;
    s.t = 0;
    s.config = config;
    s.stored_subs = initial_subs;
    s.queue = 0.0;
    s.rt = service_time(config, initial_subs, p);
    s.throughput = 0.0;
    s.saturated = false;
    return s;
}

// Advance the fluid-queue model by one tick. Arrivals either flow through or
// queue up; response time is the service term plus the time the remaining
// backlog needs to drain. An active scaling event completes (configuration
// swap, overhead ends) on the tick equal to its rp.
inline SystemState step(SystemState s, const WorkloadPoint& wp, const SimParams& p) {
    s.t += 1;
    s.last_completed.reset();
    if (s.in_scaling && s.in_scaling->rp == s.t) {
        s.config = s.in_scaling->config_after;
        s.last_completed = s.in_scaling;
        s.in_scaling.reset();
    }

    s.stored_subs = std::max(0.0, s.stored_subs + (wp.sub_rate - wp.unsub_rate) * p.dt);

    const double cap = capacity(s.config, s.stored_subs, p, s.in_scaling.has_value());
    const double backlog = s.queue;
    s.queue = std::max(0.0, backlog + (wp.notif_rate - cap) * p.dt);
    s.throughput = std::min(wp.notif_rate + backlog / p.dt, cap);
    s.rt = service_time(s.config, s.stored_subs, p) + s.queue / cap;
    s.saturated = wp.notif_rate > cap;
    return s;
}

// Ground-truth duration of a scaling action: affine in the notification rate
// and the stored subscriptions, with seeded +-t_noise relative noise.
inline double true_scaling_time(const WorkloadPoint& wp, double stored_subs, const SimParams& p,
                                Rng& rng) {
    double t = p.t_a0 + p.t_a1 * wp.notif_rate + p.t_a2 * stored_subs;
    t *= 1.0 + rng.uniform(-p.t_noise, p.t_noise);
    return std::max(t, p.dt);
}

inline SystemState begin_scaling(SystemState s, ScaleKind kind, double predicted,
                                 const WorkloadPoint& wp, const SimParams& p, Rng& rng) {
    if (s.in_scaling) throw ScalingInProgress();
    if (kind == ScaleKind::scale_in && s.config.matcher_instances <= 1) throw AtMinimum();

    ScalingEvent ev;
    ev.kind = kind;
    ev.tp = s.t;
    ev.t_actual = true_scaling_time(wp, s.stored_subs, p, rng);
    ev.t_predicted = predicted;
    ev.rp = s.t + static_cast<std::int64_t>(std::ceil(ev.t_actual / p.dt));
    ev.config_before = s.config;
    ev.config_after = s.config;
    ev.config_after.matcher_instances = kind == ScaleKind::scale_out
                                            ? s.config.matcher_instances * 2
                                            : s.config.matcher_instances / 2;
    s.in_scaling = ev;
    return s;
}

// Smallest power-of-two matcher count that keeps a steady state (empty queue)
// feasible: arrivals within capacity and the service term within the SLA.
inline int minimal_sufficient_matchers(const WorkloadPoint& wp, double stored_subs,
                                       const SimParams& p, double sla_max_rt) {
    for (int m = 1; m <= (1 << 20); m *= 2) {
        ServiceConfig c{1, m, 1};
        if (wp.notif_rate <= capacity(c, stored_subs, p, false) &&
            service_time(c, stored_subs, p) <= sla_max_rt) {
            return m;
        }
    }
    throw Unsatisfiable("no matcher count up to 2^20 can sustain this workload");
}

} // namespace flas
