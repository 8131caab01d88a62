#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "flas/errors.hpp"
#include "flas/rng.hpp"
#include "flas/savgol.hpp"
#include "flas/textio.hpp"

namespace flas {

struct LinearModel {
    double intercept = 0.0;
    std::vector<double> coefficients;
    std::vector<std::string> predictor_names;
    double r2 = 0.0;
    double mae = 0.0;

    double predict(std::span<const double> x) const {
        double y = intercept;
        for (std::size_t i = 0; i < coefficients.size(); ++i) y += coefficients[i] * x[i];
        return y;
    }
};

namespace detail {

inline double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

} // namespace detail

// Ordinary least squares with an intercept. Predictors are standardized
// internally before the normal equations are solved, which keeps the solve
// well conditioned even when predictor scales differ by orders of magnitude;
// the coefficients are mapped back to the original units.
inline LinearModel fit_linear(const std::vector<std::vector<double>>& rows,
                              const std::vector<double>& y,
                              std::vector<std::string> names) {
    const std::size_t n = rows.size();
    const std::size_t p = names.size();
    if (n < p + 1) throw InsufficientData("need at least one more row than coefficients");

    std::vector<double> mean(p, 0.0), sd(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0.0;
        for (std::size_t i = 0; i < n; ++i) m += rows[i][j];
        m /= n;
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) v += (rows[i][j] - m) * (rows[i][j] - m);
        mean[j] = m;
        sd[j] = std::sqrt(v / n);
    }
    for (std::size_t j = 0; j < p; ++j)
        if (sd[j] == 0.0) throw RankDeficient("predictor '" + names[j] + "' has zero variance");

    const double ymean = detail::mean_of(y);

    // Normal equations on standardized predictors and centered target.
    std::vector<std::vector<double>> ata(p, std::vector<double>(p, 0.0));
    std::vector<double> atb(p, 0.0);
    std::vector<double> xs(p);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) xs[j] = (rows[i][j] - mean[j]) / sd[j];
        const double yc = y[i] - ymean;
        for (std::size_t r = 0; r < p; ++r) {
            atb[r] += xs[r] * yc;
            for (std::size_t c = 0; c < p; ++c) ata[r][c] += xs[r] * xs[c];
        }
    }
    if (!detail::solve_dense(ata, atb)) throw RankDeficient("collinear predictors");

    LinearModel model;
    model.predictor_names = std::move(names);
    model.coefficients.resize(p);
    model.intercept = ymean;
    for (std::size_t j = 0; j < p; ++j) {
        model.coefficients[j] = atb[j] / sd[j];
        model.intercept -= model.coefficients[j] * mean[j];
    }

    double ss_res = 0.0, ss_tot = 0.0, abs_err = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - model.predict(rows[i]);
        ss_res += e * e;
        ss_tot += (y[i] - ymean) * (y[i] - ymean);
        abs_err += std::abs(e);
    }
    model.mae = abs_err / n;
    model.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-24 ? 1.0 : 0.0);
    return model;
}

// Standardized coefficient magnitudes |b_j| * sd(x_j), sorted descending;
// used to rank which low-level metric carries the most predictive weight.
inline std::vector<std::pair<std::string, double>> kpi_ranking(
    const LinearModel& model, const std::vector<std::vector<double>>& rows) {
    const std::size_t p = model.coefficients.size();
    std::vector<std::pair<std::string, double>> out;
    out.reserve(p);
    for (std::size_t j = 0; j < p; ++j) {
        double m = 0.0;
        for (const auto& r : rows) m += r[j];
        m /= rows.size();
        double v = 0.0;
        for (const auto& r : rows) v += (r[j] - m) * (r[j] - m);
        out.emplace_back(model.predictor_names[j],
                         std::abs(model.coefficients[j]) * std::sqrt(v / rows.size()));
    }
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second > b.second; });
    return out;
}

struct CvScore {
    double r2 = 0.0;
    double mae = 0.0;
};

// k-fold cross validation of the OLS fit: rows are shuffled with a fixed
// seed, split into k contiguous folds, and scored out of fold.
inline CvScore kfold_cv(const std::vector<std::vector<double>>& rows,
                        const std::vector<double>& y,
                        const std::vector<std::string>& names, int k,
                        std::uint64_t seed = 0x5eedULL) {
    const std::size_t n = rows.size();
    if (k < 2 || n < static_cast<std::size_t>(k))
        throw TooFewRows("k-fold needs k >= 2 and at least k rows");

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    for (std::size_t i = n; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_u64() % i]);

    double r2_sum = 0.0, mae_sum = 0.0;
    std::size_t fold_start = 0;
    for (int f = 0; f < k; ++f) {
        const std::size_t fold_size = n / k + (static_cast<std::size_t>(f) < n % k ? 1 : 0);
        const std::size_t fold_end = fold_start + fold_size;

        std::vector<std::vector<double>> train_x;
        std::vector<double> train_y;
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= fold_start && i < fold_end) continue;
            train_x.push_back(rows[idx[i]]);
            train_y.push_back(y[idx[i]]);
        }
        const LinearModel m = fit_linear(train_x, train_y, names);

        double ss_res = 0.0, ss_tot = 0.0, abs_err = 0.0, fold_mean = 0.0;
        for (std::size_t i = fold_start; i < fold_end; ++i) fold_mean += y[idx[i]];
        fold_mean /= fold_size;
        for (std::size_t i = fold_start; i < fold_end; ++i) {
            const double yi = y[idx[i]];
            const double e = yi - m.predict(rows[idx[i]]);
            ss_res += e * e;
            ss_tot += (yi - fold_mean) * (yi - fold_mean);
            abs_err += std::abs(e);
        }
        r2_sum += ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res <= 1e-24 ? 1.0 : 0.0);
        mae_sum += abs_err / fold_size;
        fold_start = fold_end;
    }
    return {r2_sum / k, mae_sum / k};
}

// Flat text serialization: one `name=value` line per field, doubles printed
// with 17 significant digits so the round trip is bit exact.
inline std::string to_text(const LinearModel& m) {
    std::string out;
    out += "intercept=" + detail::format_g17(m.intercept) + "\n";
    for (std::size_t j = 0; j < m.coefficients.size(); ++j)
        out += m.predictor_names[j] + "=" + detail::format_g17(m.coefficients[j]) + "\n";
    out += "r2=" + detail::format_g17(m.r2) + "\n";
    out += "mae=" + detail::format_g17(m.mae) + "\n";
    return out;
}

inline LinearModel linear_model_from_text(const std::string& text) {
    LinearModel m;
    std::istringstream in(text);
    std::string line;
    bool have_intercept = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("bad model line: " + line);
        const std::string key = line.substr(0, eq);
        const double value = std::strtod(line.c_str() + eq + 1, nullptr);
        if (key == "intercept") {
            m.intercept = value;
            have_intercept = true;
        } else if (key == "r2") {
            m.r2 = value;
        } else if (key == "mae") {
            m.mae = value;
        } else {
            m.predictor_names.push_back(key);
            m.coefficients.push_back(value);
        }
    }
    if (!have_intercept) throw ConfigError("model file missing intercept");
    return m;
}

} // namespace flas
