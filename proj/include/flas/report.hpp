#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flas/errors.hpp"
#include "flas/runner.hpp"
#include "flas/sim.hpp"
#include "flas/trace.hpp"
#include "flas/workload.hpp"

namespace flas {

// Change points of the minimal sufficient configuration over time.
struct DemandPoint {
    std::int64_t t_dp = 0;
    int required_matchers = 1;
    bool up = true; // direction of the change
};
using DemandSchedule = std::vector<DemandPoint>;

// Demand points of a scenario: run the no-scaling baseline (stored
// subscriptions do not depend on scaling), compute the minimal sufficient
// matcher count per tick, and emit an entry at every change.
inline DemandSchedule demand_points(const WorkloadSpec& spec, double initial_subs,
                                    const SimParams& sp, double sla_max_rt) {
    const std::vector<WorkloadPoint> series = generate(spec);
    DemandSchedule schedule;
    double subs = initial_subs;
    int prev = minimal_sufficient_matchers(WorkloadPoint{0, series.empty() ? 0.0 : series[0].notif_rate, 0, 0},
                                           subs, sp, sla_max_rt);
    for (const WorkloadPoint& wp : series) {
        subs = std::max(0.0, subs + (wp.sub_rate - wp.unsub_rate) * sp.dt);
        const int m = minimal_sufficient_matchers(wp, subs, sp, sla_max_rt);
        if (m != prev) {
            schedule.push_back({wp.t, m, m > prev});
            prev = m;
        }
    }
    return schedule;
}

struct ProvisioningResult {
    double over_pct = 0.0;
    double under_pct = 0.0;
};

// Pair demand points with same-direction scaling events (greedy,
// nearest-in-time by RP) and accumulate the signed DP-RP intervals: a
// scale-out finishing late is under-provisioning and finishing early is
// over-provisioning; scale-in is the reverse. Demand points without a
// matching event accrue their penalty until the end of the run.
inline ProvisioningResult provisioning_report(const RunTrace& trace,
                                              const DemandSchedule& schedule, double dt = 1.0) {
    if (trace.rows.empty()) throw EmptyTrace();
    const std::int64_t t_end = trace.rows.back().t;
    for (const DemandPoint& dp : schedule)
        if (dp.t_dp > t_end)
            throw MismatchedRuns("demand point beyond trace end; schedule from another run?");

    std::vector<bool> used(trace.events.size(), false);
    double over_ticks = 0.0, under_ticks = 0.0;
    for (const DemandPoint& dp : schedule) {
        const ScaleKind want = dp.up ? ScaleKind::scale_out : ScaleKind::scale_in;
        std::int64_t best = -1;
        for (std::size_t i = 0; i < trace.events.size(); ++i) {
            if (used[i] || trace.events[i].kind != want) continue;
            if (best < 0 || std::llabs(trace.events[i].rp - dp.t_dp) <
                                std::llabs(trace.events[best].rp - dp.t_dp))
                best = static_cast<std::int64_t>(i);
        }
        if (best < 0) {
            // Missed demand: wrong configuration from here to the end.
            const double span = static_cast<double>(t_end - dp.t_dp);
            (dp.up ? under_ticks : over_ticks) += span;
            continue;
        }
        used[best] = true;
        const double diff = static_cast<double>(trace.events[best].rp - dp.t_dp);
        if (dp.up) {
            (diff > 0 ? under_ticks : over_ticks) += std::abs(diff);
        } else {
            (diff > 0 ? over_ticks : under_ticks) += std::abs(diff);
        }
    }
    const double total = static_cast<double>(trace.rows.size()) * dt;
    ProvisioningResult r;
    r.over_pct = std::min(100.0, 100.0 * over_ticks * dt / total);
    r.under_pct = std::min(100.0, 100.0 * under_ticks * dt / total);
    return r;
}

// Percentage of ticks whose true response time exceeded the SLA bound.
inline double sla_violation(const RunTrace& trace, double sla_max_rt) {
    if (trace.rows.empty()) throw EmptyTrace();
    std::size_t bad = 0;
    for (const TraceRow& r : trace.rows)
        if (r.rt > sla_max_rt) ++bad;
    return 100.0 * static_cast<double>(bad) / static_cast<double>(trace.rows.size());
}

struct ScalingReport {
    std::optional<double> avg_t_scale_out;
    std::optional<double> avg_t_scale_in;
    std::optional<double> rel_err_scale_out_pct; // signed, 100*(T' - T)/T averaged
    std::optional<double> rel_err_scale_in_pct;
    int n_scale_out = 0;
    int n_scale_in = 0;
};

// Mean actual duration and mean signed relative prediction error per scaling
// direction; fields stay absent when no action of that kind occurred.
inline ScalingReport scaling_report(const RunTrace& trace) {
    ScalingReport rep;
    double sum_t[2] = {0, 0}, sum_err[2] = {0, 0};
    int n[2] = {0, 0};
    for (const ScalingEvent& e : trace.events) {
        const int k = e.kind == ScaleKind::scale_out ? 0 : 1;
        sum_t[k] += e.t_actual;
        sum_err[k] += 100.0 * (e.t_predicted - e.t_actual) / e.t_actual;
        n[k] += 1;
    }
    rep.n_scale_out = n[0];
    rep.n_scale_in = n[1];
    if (n[0] > 0) {
        rep.avg_t_scale_out = sum_t[0] / n[0];
        rep.rel_err_scale_out_pct = sum_err[0] / n[0];
    }
    if (n[1] > 0) {
        rep.avg_t_scale_in = sum_t[1] / n[1];
        rep.rel_err_scale_in_pct = sum_err[1] / n[1];
    }
    return rep;
}

struct EvaluationReport {
    std::string scenario;
    std::string variant;
    double over_provisioning_pct = 0.0;
    double under_provisioning_pct = 0.0;
    double sla_violation_pct = 0.0;
    ScalingReport scaling;
};

inline EvaluationReport evaluate_trace(const RunTrace& trace, const DemandSchedule& schedule,
                                       double sla_max_rt, double dt = 1.0) {
    EvaluationReport rep;
    const ProvisioningResult prov = provisioning_report(trace, schedule, dt);
    rep.over_provisioning_pct = prov.over_pct;
    rep.under_provisioning_pct = prov.under_pct;
    rep.sla_violation_pct = sla_violation(trace, sla_max_rt);
    rep.scaling = scaling_report(trace);
    return rep;
}

inline constexpr const char* kReportHeader =
    "scenario,variant,over_provisioning_pct,under_provisioning_pct,sla_violation_pct,"
    "avg_t_scale_in,avg_t_scale_out,rel_err_t_scale_in,rel_err_t_scale_out,"
    "n_scale_out,n_scale_in";

namespace detail {
inline std::string opt_csv(const std::optional<double>& v) {
    return v ? csv_num(*v) : std::string("NA");
}
} // namespace detail

inline std::string reports_to_csv(const std::vector<EvaluationReport>& reports) {
    std::string out = std::string(kReportHeader) + "\n";
    for (const EvaluationReport& r : reports) {
        out += r.scenario + ',' + r.variant + ',';
        out += detail::csv_num(r.over_provisioning_pct) + ',';
        out += detail::csv_num(r.under_provisioning_pct) + ',';
        out += detail::csv_num(r.sla_violation_pct) + ',';
        out += detail::opt_csv(r.scaling.avg_t_scale_in) + ',';
        out += detail::opt_csv(r.scaling.avg_t_scale_out) + ',';
        out += detail::opt_csv(r.scaling.rel_err_scale_in_pct) + ',';
        out += detail::opt_csv(r.scaling.rel_err_scale_out_pct) + ',';
        out += std::to_string(r.scaling.n_scale_out) + ',';
        out += std::to_string(r.scaling.n_scale_in) + '\n';
    }
    return out;
}

struct ComparisonCell {
    std::string scenario;
    std::string variant;
    bool ok = true;
    std::string error;
    double mean_sla_violation_pct = 0.0;
    double mean_over_provisioning_pct = 0.0;
    double mean_under_provisioning_pct = 0.0;
};

struct ScenarioUnderTest {
    WorkloadSpec spec;
    double initial_subs = 0.0;
};

// Fig.-13-style comparison: mean SLA-violation and over-provisioning time per
// (scenario, variant), averaged over `seeds` seeded runs.
inline std::vector<ComparisonCell> compare(const std::vector<ScenarioUnderTest>& scenarios,
                                           const std::vector<Variant>& variants,
                                           const ModelSet* models, const SimParams& sp,
                                           const MetricsParams& mp, const RunnerParams& rp,
                                           const DeciderConfig& dc, double sla_max_rt, int seeds,
                                           std::uint64_t master_seed) {
    if (scenarios.empty()) throw ConfigError("compare needs at least one scenario");
    if (variants.size() < 2) throw ConfigError("compare needs at least two variants");

    std::vector<ComparisonCell> cells;
    for (const ScenarioUnderTest& sc : scenarios) {
        RunnerParams rps = rp;
        rps.initial_subs = sc.initial_subs;
        const DemandSchedule schedule = demand_points(sc.spec, sc.initial_subs, sp, sla_max_rt);
        for (Variant v : variants) {
            ComparisonCell cell;
            cell.scenario = to_string(sc.spec.kind);
            cell.variant = to_string(v);
            try {
                double sla = 0.0, over = 0.0, under = 0.0;
                for (int s = 0; s < seeds; ++s) {
                    const std::uint64_t run_seed = derive_seed(
                        master_seed, std::string("run/") + cell.scenario + "/" + cell.variant +
                                         "/" + std::to_string(s));
                    const RunTrace trace =
                        run_scenario(sc.spec, v, models, sp, mp, rps, dc, run_seed);
                    sla += sla_violation(trace, sla_max_rt);
                    const ProvisioningResult prov = provisioning_report(trace, schedule, sp.dt);
                    over += prov.over_pct;
                    under += prov.under_pct;
                }
                cell.mean_sla_violation_pct = sla / seeds;
                cell.mean_over_provisioning_pct = over / seeds;
                cell.mean_under_provisioning_pct = under / seeds;
            } catch (const Error& e) {
                cell.ok = false;
                cell.error = e.what();
            }
            cells.push_back(cell);
        }
    }
    return cells;
}

inline std::string comparison_to_csv(const std::vector<ComparisonCell>& cells) {
    std::string out = "scenario,variant,mean_sla_violation_pct,mean_over_provisioning_pct,"
                      "mean_under_provisioning_pct,status\n";
    for (const ComparisonCell& c : cells) {
        out += c.scenario + ',' + c.variant + ',';
        if (c.ok) {
            out += detail::csv_num(c.mean_sla_violation_pct) + ',';
            out += detail::csv_num(c.mean_over_provisioning_pct) + ',';
            out += detail::csv_num(c.mean_under_provisioning_pct) + ",ok\n";
        } else {
            out += "NA,NA,NA,failed: " + c.error + "\n";
        }
    }
    return out;
}

} // namespace flas
