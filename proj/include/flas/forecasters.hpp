#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flas/errors.hpp"
#include "flas/metrics.hpp"
#include "flas/regression.hpp"
#include "flas/textio.hpp"
#include "flas/trend.hpp"

namespace flas {

// One recorded scaling action from the profiling phase.
struct ScalingTimeRow {
    double notif_rate = 0.0; // N
    double stored_subs = 0.0;// S
    double t_sa = 0.0;       // measured duration, seconds
};

// One per-tick observation pairing preprocessed resource metrics with the
// measured high-level performance.
struct PerfRow {
    CleanSample sample;
    double rt = 0.0;         // seconds
    double throughput = 0.0; // messages/s
};

// Everything the profiling phase collects.
struct TrainingSets {
    std::vector<ScalingTimeRow> scaling_times;
    std::vector<std::pair<std::int64_t, double>> rt_series;
    std::vector<PerfRow> perf_rows;
};

// T'_sa(N, S): ordinary least squares on the recorded scaling actions.
inline LinearModel fit_scaling_time(const std::vector<ScalingTimeRow>& rows) {
    if (rows.size() < 3) throw InsufficientData("scaling-time fit needs at least 3 rows");
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    x.reserve(rows.size());
    y.reserve(rows.size());
    for (const auto& r : rows) {
        x.push_back({r.notif_rate, r.stored_subs});
        y.push_back(r.t_sa);
    }
    return fit_linear(x, y, {"N", "S"});
}

inline double forecast_scaling_time(const LinearModel& model, double notif_rate,
                                    double stored_subs, double dt) {
    const double x[2] = {notif_rate, stored_subs};
    return std::max(model.predict(x), dt);
}

struct PerformanceModels {
    LinearModel rt_model;
    LinearModel x_model;
};

// Linear maps from the preprocessed resource metrics to the two SLA
// parameters (response time and throughput). Rows whose preprocessing raised
// the outlier flag are excluded.
inline PerformanceModels fit_performance_model(const std::vector<PerfRow>& rows) {
    std::vector<std::vector<double>> x;
    std::vector<double> y_rt, y_x;
    for (const auto& r : rows) {
        if (r.sample.outlier_flag) continue;
        x.push_back(perf_predictors(r.sample));
        y_rt.push_back(r.rt);
        y_x.push_back(r.throughput);
    }
    const std::size_t p = kPerfPredictorNames.size();
    if (x.size() < p + 2) throw InsufficientData("performance fit needs at least p+2 clean rows");

    std::vector<std::string> names(kPerfPredictorNames.begin(), kPerfPredictorNames.end());
    PerformanceModels m;
    m.rt_model = fit_linear(x, y_rt, names);
    m.x_model = fit_linear(x, y_x, names);
    return m;
}

inline double estimate_rt(const LinearModel& rt_model, const CleanSample& sample) {
    return std::max(0.0, rt_model.predict(perf_predictors(sample)));
}

inline double estimate_throughput(const LinearModel& x_model, const CleanSample& sample) {
    return std::max(0.0, x_model.predict(perf_predictors(sample)));
}

// Relative-error distribution of the response-time estimator on held-out
// rows; the histogram mirrors how estimation quality is reported.
struct EstimateErrorStats {
    double p50 = 0.0, p90 = 0.0, p99 = 0.0, max = 0.0;
    std::vector<std::size_t> histogram; // bins of width bin_width over [0, ...)
    double bin_width = 0.1;
};

inline EstimateErrorStats estimate_error_stats(const LinearModel& rt_model,
                                               const std::vector<PerfRow>& holdout,
                                               double bin_width = 0.1) {
    if (holdout.empty()) throw InsufficientData("no held-out rows");
    std::vector<double> errs;
    errs.reserve(holdout.size());
    for (const auto& r : holdout) {
        const double est = estimate_rt(rt_model, r.sample);
        const double denom = std::max(r.rt, 1e-9);
        errs.push_back(std::abs(est - r.rt) / denom);
    }
    std::sort(errs.begin(), errs.end());
    auto pct = [&](double q) {
        const double pos = q * (errs.size() - 1);
        const std::size_t lo = static_cast<std::size_t>(pos);
        const std::size_t hi = std::min(lo + 1, errs.size() - 1);
        return errs[lo] + (pos - lo) * (errs[hi] - errs[lo]);
    };
    EstimateErrorStats st;
    st.bin_width = bin_width;
    st.p50 = pct(0.50);
    st.p90 = pct(0.90);
    st.p99 = pct(0.99);
    st.max = errs.back();
    const std::size_t nbins = static_cast<std::size_t>(std::ceil(st.max / bin_width)) + 1;
    st.histogram.assign(std::min<std::size_t>(nbins, 200), 0);
    for (double e : errs) {
        const std::size_t b =
            std::min(st.histogram.size() - 1, static_cast<std::size_t>(e / bin_width));
        st.histogram[b]++;
    }
    return st;
}

// The fitted models the decider consumes.
struct ModelSet {
    LinearModel scaling_time;
    TrendModel trend;
    LinearModel rt_model;
    LinearModel x_model;
};

// --- training-set CSV round trip (profiling output, training input) ---

inline std::string scaling_times_to_csv(const std::vector<ScalingTimeRow>& rows) {
    std::string out = "N,S,T_sa\n";
    for (const auto& r : rows)
        out += detail::format_g17(r.notif_rate) + ',' + detail::format_g17(r.stored_subs) + ',' +
               detail::format_g17(r.t_sa) + '\n';
    return out;
}

inline std::vector<ScalingTimeRow> scaling_times_from_csv(const std::string& csv) {
    std::vector<ScalingTimeRow> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 3) throw ConfigError("malformed scaling-time row: " + line);
        rows.push_back({std::strtod(f[0].c_str(), nullptr), std::strtod(f[1].c_str(), nullptr),
                        std::strtod(f[2].c_str(), nullptr)});
    }
    return rows;
}

inline std::string rt_series_to_csv(const std::vector<std::pair<std::int64_t, double>>& series) {
    std::string out = "t,rt\n";
    for (const auto& [t, rt] : series)
        out += std::to_string(t) + ',' + detail::format_g17(rt) + '\n';
    return out;
}

inline std::vector<std::pair<std::int64_t, double>> rt_series_from_csv(const std::string& csv) {
    std::vector<std::pair<std::int64_t, double>> series;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < 2) throw ConfigError("malformed rt-series row: " + line);
        series.emplace_back(std::stoll(f[0]), std::strtod(f[1].c_str(), nullptr));
    }
    return series;
}

inline std::string perf_rows_to_csv(const std::vector<PerfRow>& rows) {
    std::string out = "t";
    for (const char* n : kMetricChannelNames) out += std::string(",") + n;
    out += ",mem_used_pct,outlier_flag,rt,throughput\n";
    for (const PerfRow& r : rows) {
        out += std::to_string(r.sample.avg.t);
        for (auto ch : kMetricChannels) out += ',' + detail::format_g17(r.sample.avg.*ch);
        out += ',' + detail::format_g17(r.sample.mem_used_pct);
        out += r.sample.outlier_flag ? ",1" : ",0";
        out += ',' + detail::format_g17(r.rt) + ',' + detail::format_g17(r.throughput) + '\n';
    }
    return out;
}

inline std::vector<PerfRow> perf_rows_from_csv(const std::string& csv) {
    std::vector<PerfRow> rows;
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    const std::size_t want = 1 + kMetricChannels.size() + 4;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = detail::split_csv_line(line);
        if (f.size() < want) throw ConfigError("malformed performance row: " + line);
        PerfRow r;
        r.sample.avg.t = std::stoll(f[0]);
        for (std::size_t c = 0; c < kMetricChannels.size(); ++c)
            r.sample.avg.*kMetricChannels[c] = std::strtod(f[1 + c].c_str(), nullptr);
        r.sample.mem_used_pct = std::strtod(f[1 + kMetricChannels.size()].c_str(), nullptr);
        r.sample.outlier_flag = f[2 + kMetricChannels.size()] == "1";
        r.rt = std::strtod(f[3 + kMetricChannels.size()].c_str(), nullptr);
        r.throughput = std::strtod(f[4 + kMetricChannels.size()].c_str(), nullptr);
        rows.push_back(r);
    }
    return rows;
}

} // namespace flas
