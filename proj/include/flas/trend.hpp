#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "flas/errors.hpp"
#include "flas/regression.hpp"
#include "flas/savgol.hpp"

namespace flas {

enum class TrendKind { harmonic_ar, pure_ar };

inline const char* to_string(TrendKind k) {
    return k == TrendKind::harmonic_ar ? "harmonic_ar" : "pure_ar";
}

// Time-series model of the smoothed response-time derivative: a deterministic
// mean function (constant level, optionally plus K harmonics over the
// seasonal period) with AR(2) errors. pure_ar is the zero-harmonics case.
struct TrendModel {
    TrendKind kind = TrendKind::pure_ar;
    double period = 0.0; // ticks
    int harmonics = 0;   // K (0 for pure_ar)
    double intercept = 0.0;
    std::vector<std::pair<double, double>> fourier_coeffs; // (a_k, b_k), k = 1..K
    double ar1 = 0.0;
    double ar2 = 0.0;
    double residual_sigma = 0.0;
    double cv_mae = 0.0;

    // Mean component at an absolute tick.
    double mean_at(double t) const {
        double m = intercept;
        for (std::size_t k = 0; k < fourier_coeffs.size(); ++k) {
            const double w = 2.0 * std::numbers::pi * static_cast<double>(k + 1) * t / period;
            m += fourier_coeffs[k].first * std::cos(w) + fourier_coeffs[k].second * std::sin(w);
        }
        return m;
    }

    bool stationary() const {
        return std::abs(ar2) < 1.0 && ar1 + ar2 < 1.0 && ar2 - ar1 < 1.0;
    }
};

struct ForecastVector {
    std::int64_t t0 = 0;
    double t_sa_pred = 0.0;
    std::vector<double> values; // value i forecasts tick t0 + ceil(t_sa_pred/dt) + i
};

namespace detail {

// Conditional least squares AR(2) on a zero-mean residual series. When the
// residuals carry no real signal (all round-off) the coefficients are pinned
// to zero instead of fitting noise.
struct ArFit {
    double ar1 = 0.0;
    double ar2 = 0.0;
    double sigma = 0.0;
};

inline ArFit fit_ar2(std::span<const double> e, double signal_scale) {
    ArFit fit;
    const std::size_t n = e.size();
    if (n < 4) return fit;

    double var = 0.0;
    for (double v : e) var += v * v;
    var /= n;
    if (var < 1e-18 * std::max(1.0, signal_scale * signal_scale)) return fit;

    double s11 = 0.0, s12 = 0.0, s22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (std::size_t i = 2; i < n; ++i) {
        s11 += e[i - 1] * e[i - 1];
        s12 += e[i - 1] * e[i - 2];
        s22 += e[i - 2] * e[i - 2];
        b1 += e[i] * e[i - 1];
        b2 += e[i] * e[i - 2];
    }
    const double det = s11 * s22 - s12 * s12;
    if (std::abs(det) < 1e-12 * std::max(1.0, s11 * s22)) {
        // Fall back to AR(1) when the lagged regressors are collinear.
        if (s11 > 0.0) fit.ar1 = b1 / s11;
    } else {
        fit.ar1 = (b1 * s22 - b2 * s12) / det;
        fit.ar2 = (b2 * s11 - b1 * s12) / det;
    }
    double ss = 0.0;
    for (std::size_t i = 2; i < n; ++i) {
        const double nu = e[i] - fit.ar1 * e[i - 1] - fit.ar2 * e[i - 2];
        ss += nu * nu;
    }
    fit.sigma = std::sqrt(ss / (n - 2));
    return fit;
}

struct TrendCandidate {
    TrendModel model;
    bool valid = false;
    double cv_mae = 0.0;
};

inline TrendModel fit_mean_and_ar(std::span<const double> series, std::span<const double> ticks,
                                  TrendKind kind, double period, int harmonics,
                                  double signal_scale) {
    TrendModel m;
    m.kind = kind;
    m.period = period;
    m.harmonics = kind == TrendKind::harmonic_ar ? harmonics : 0;

    std::vector<double> resid(series.size());
    if (kind == TrendKind::harmonic_ar) {
        std::vector<std::vector<double>> x(series.size());
        std::vector<std::string> names;
        for (int k = 1; k <= harmonics; ++k) {
            names.push_back("c" + std::to_string(k));
            names.push_back("s" + std::to_string(k));
        }
        for (std::size_t i = 0; i < series.size(); ++i) {
            x[i].reserve(2 * harmonics);
            for (int k = 1; k <= harmonics; ++k) {
                const double w = 2.0 * std::numbers::pi * k * ticks[i] / period;
                x[i].push_back(std::cos(w));
                x[i].push_back(std::sin(w));
            }
        }
        const LinearModel lm =
            fit_linear(x, std::vector<double>(series.begin(), series.end()), names);
        m.intercept = lm.intercept;
        for (int k = 0; k < harmonics; ++k)
            m.fourier_coeffs.emplace_back(lm.coefficients[2 * k], lm.coefficients[2 * k + 1]);
    } else {
        m.intercept = mean_of(series);
    }
    for (std::size_t i = 0; i < series.size(); ++i) resid[i] = series[i] - m.mean_at(ticks[i]);

    const ArFit ar = fit_ar2(resid, signal_scale);
    m.ar1 = ar.ar1;
    m.ar2 = ar.ar2;
    m.residual_sigma = ar.sigma;
    return m;
}

} // namespace detail

// Fit the trend model on a response-time series: derivative, Savitzky-Golay
// smoothing, then two candidates (harmonic regression with AR(2) errors and a
// plain AR(2)) scored by rolling-origin cross validation over the last 20% of
// the series with one-step-ahead forecasts. The lower-MAE candidate wins and
// is refitted on the full series; effective ties go to the harmonic model.
inline TrendModel fit_trend_model(const std::vector<std::pair<std::int64_t, double>>& rt_series,
                                  double dt, std::int64_t seasonal_period, int sg_window,
                                  int sg_degree, int harmonics) {
    const std::size_t n = rt_series.size();
    if (seasonal_period < 2 || n < 2 * static_cast<std::size_t>(seasonal_period))
        throw TooShort("trend fit needs at least two seasonal periods of data");
    if (harmonics < 1) throw ConfigError("harmonics must be >= 1");

    std::vector<double> rt(n), ticks(n);
    for (std::size_t i = 0; i < n; ++i) {
        ticks[i] = static_cast<double>(rt_series[i].first);
        rt[i] = rt_series[i].second;
    }

    // The one-sided boundary differences are lower-order accurate; drop them
    // before smoothing so they cannot distort the fit.
    std::vector<double> deriv = first_derivative(rt, dt);
    deriv.erase(deriv.begin());
    deriv.pop_back();
    ticks.erase(ticks.begin());
    ticks.pop_back();
    const std::vector<double> sm = savgol_filter(deriv, sg_window, sg_degree);

    const std::size_t m_len = sm.size();
    double scale = 0.0;
    for (double v : sm) scale = std::max(scale, std::abs(v));

    const std::size_t train_len = std::max<std::size_t>(4, (m_len * 4) / 5);
    if (train_len >= m_len) throw TooShort("series too short for rolling-origin validation");

    const std::span<const double> train(sm.data(), train_len);
    const std::span<const double> train_ticks(ticks.data(), train_len);

    detail::TrendCandidate cands[2];
    const TrendKind kinds[2] = {TrendKind::harmonic_ar, TrendKind::pure_ar};
    for (int c = 0; c < 2; ++c) {
        detail::TrendCandidate& cand = cands[c];
        try {
            cand.model = detail::fit_mean_and_ar(train, train_ticks, kinds[c],
                                                 static_cast<double>(seasonal_period), harmonics,
                                                 scale);
        } catch (const Error&) {
            continue;
        }
        if (!cand.model.stationary()) continue;

        // Rolling-origin one-step-ahead evaluation with fixed parameters.
        double abs_err = 0.0;
        for (std::size_t i = train_len; i < m_len; ++i) {
            const double e1 = sm[i - 1] - cand.model.mean_at(ticks[i - 1]);
            const double e2 = sm[i - 2] - cand.model.mean_at(ticks[i - 2]);
            const double pred =
                cand.model.mean_at(ticks[i]) + cand.model.ar1 * e1 + cand.model.ar2 * e2;
            abs_err += std::abs(sm[i] - pred);
        }
        cand.cv_mae = abs_err / static_cast<double>(m_len - train_len);
        cand.valid = true;
    }

    if (!cands[0].valid && !cands[1].valid)
        throw NonStationary("both trend candidates have AR roots inside the unit circle");

    int pick;
    if (cands[0].valid && cands[1].valid) {
        // Ties within round-off of the series scale resolve to harmonic_ar.
        const double tol = 1e-9 * std::max(scale, 1e-300);
        pick = cands[0].cv_mae <= cands[1].cv_mae + tol ? 0 : 1;
    } else {
        pick = cands[0].valid ? 0 : 1;
    }

    TrendModel model = detail::fit_mean_and_ar(sm, ticks, kinds[pick],
                                               static_cast<double>(seasonal_period), harmonics,
                                               scale);
    if (!model.stationary())
        throw NonStationary("selected trend model lost stationarity on the full refit");
    model.cv_mae = cands[pick].cv_mae;
    return model;
}

// Forecast h values of the smoothed derivative, starting ceil(t_sa_pred/dt)
// ticks after t0. The mean component is evaluated at absolute ticks; the AR
// component recurses on its own forecasts from the last two observed
// residuals. history must end at tick t0.
inline ForecastVector forecast_trend(const TrendModel& model, std::span<const double> history,
                                     std::int64_t t0, double t_sa_pred, int h, double dt) {
    if (history.size() < 2)
        throw InsufficientHistory("trend forecast needs two trailing history points");
    if (h < 1) throw ConfigError("forecast horizon must be >= 1");

    const auto offset =
        std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t_sa_pred / dt)));

    double e_prev2 = history[history.size() - 2] - model.mean_at(static_cast<double>(t0 - 1));
    double e_prev = history[history.size() - 1] - model.mean_at(static_cast<double>(t0));

    ForecastVector out;
    out.t0 = t0;
    out.t_sa_pred = t_sa_pred;
    out.values.reserve(h);
    if (offset == 0) out.values.push_back(history.back()); // forecast of the present
    for (std::int64_t j = 1; static_cast<int>(out.values.size()) < h; ++j) {
        const double e = model.ar1 * e_prev + model.ar2 * e_prev2;
        e_prev2 = e_prev;
        e_prev = e;
        if (j >= offset) out.values.push_back(model.mean_at(static_cast<double>(t0 + j)) + e);
    }
    return out;
}

inline std::string to_text(const TrendModel& m) {
    std::string out;
    out += std::string("kind=") + to_string(m.kind) + "\n";
    out += "period=" + detail::format_g17(m.period) + "\n";
    out += "harmonics=" + std::to_string(m.harmonics) + "\n";
    out += "intercept=" + detail::format_g17(m.intercept) + "\n";
    for (std::size_t k = 0; k < m.fourier_coeffs.size(); ++k) {
        out += "a" + std::to_string(k + 1) + "=" + detail::format_g17(m.fourier_coeffs[k].first) +
               "\n";
        out += "b" + std::to_string(k + 1) + "=" + detail::format_g17(m.fourier_coeffs[k].second) +
               "\n";
    }
    out += "ar1=" + detail::format_g17(m.ar1) + "\n";
    out += "ar2=" + detail::format_g17(m.ar2) + "\n";
    out += "residual_sigma=" + detail::format_g17(m.residual_sigma) + "\n";
    out += "cv_mae=" + detail::format_g17(m.cv_mae) + "\n";
    return out;
}

inline TrendModel trend_model_from_text(const std::string& text) {
    TrendModel m;
    std::istringstream in(text);
    std::string line;
    std::vector<double> a, b;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad model line: " + line);
        const std::string key = line.substr(0, eq);
        const std::string val = line.substr(eq + 1);
        if (key == "kind") {
            if (val == "harmonic_ar")
                m.kind = TrendKind::harmonic_ar;
            else if (val == "pure_ar")
                m.kind = TrendKind::pure_ar;
            else
                throw ConfigError("unknown trend kind: " + val);
        } else if (key == "period") {
            m.period = std::strtod(val.c_str(), nullptr);
        } else if (key == "harmonics") {
            m.harmonics = std::stoi(val);
        } else if (key == "intercept") {
            m.intercept = std::strtod(val.c_str(), nullptr);
        } else if (key == "ar1") {
            m.ar1 = std::strtod(val.c_str(), nullptr);
        } else if (key == "ar2") {
            m.ar2 = std::strtod(val.c_str(), nullptr);
        } else if (key == "residual_sigma") {
            m.residual_sigma = std::strtod(val.c_str(), nullptr);
        } else if (key == "cv_mae") {
            m.cv_mae = std::strtod(val.c_str(), nullptr);
        } else if (key[0] == 'a') {
            a.push_back(std::strtod(val.c_str(), nullptr));
        } else if (key[0] == 'b') {
            b.push_back(std::strtod(val.c_str(), nullptr));
        } else {
            throw ConfigError("unknown trend model key: " + key);
        }
    }
    for (std::size_t k = 0; k < a.size(); ++k)
        m.fourier_coeffs.emplace_back(a[k], k < b.size() ? b[k] : 0.0);
    return m;
}

} // namespace flas
