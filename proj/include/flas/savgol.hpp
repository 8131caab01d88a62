#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "flas/errors.hpp"

namespace flas {

// First-order derivative of a uniformly sampled series: central differences
// in the interior, one-sided at both ends. Output has the input's length.
inline std::vector<double> first_derivative(std::span<const double> series, double dt) {
    const std::size_t n = series.size();
    if (n < 2) throw TooShort("first_derivative needs at least 2 samples");
    std::vector<double> out(n);
    out[0] = (series[1] - series[0]) / dt;
    for (std::size_t i = 1; i + 1 < n; ++i)
        out[i] = (series[i + 1] - series[i - 1]) / (2.0 * dt);
    out[n - 1] = (series[n - 1] - series[n - 2]) / dt;
    return out;
}

namespace detail {

// Solve the small symmetric system A x = b in place by Gaussian elimination
// with partial pivoting. Returns false on a (numerically) singular matrix.
inline bool solve_dense(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::abs(v));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        if (std::abs(a[piv][col]) < 1e-12 * scale) return false;
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (std::size_t c = i + 1; c < n; ++c) acc -= a[i][c] * b[c];
        b[i] = acc / a[i][i];
    }
    return true;
}

// Least-squares polynomial fit over the window [lo, hi] of `series`,
// evaluated at position `at`. Positions are centered on `at`, so the value
// is the constant coefficient of the fitted polynomial.
inline double polyfit_eval(std::span<const double> series, std::size_t lo, std::size_t hi,
                           std::size_t at, int degree) {
    const int npts = static_cast<int>(hi - lo + 1);
    const int deg = std::min(degree, npts - 1);
    const int p = deg + 1;
    std::vector<std::vector<double>> ata(p, std::vector<double>(p, 0.0));
    std::vector<double> atb(p, 0.0);
    for (std::size_t j = lo; j <= hi; ++j) {
        const double x = static_cast<double>(j) - static_cast<double>(at);
        double pow_i = 1.0;
        std::vector<double> powers(p);
        for (int i = 0; i < p; ++i) {
            powers[i] = pow_i;
            pow_i *= x;
        }
        for (int r = 0; r < p; ++r) {
            atb[r] += powers[r] * series[j];
            for (int c = 0; c < p; ++c) ata[r][c] += powers[r] * powers[c];
        }
    }
    solve_dense(ata, atb);
    return atb[0];
}

} // namespace detail

// Savitzky-Golay smoothing: each output point is the center value of the
// least-squares polynomial fitted over the surrounding window. Near the
// boundaries the window is truncated and the polynomial refitted there.
inline std::vector<double> savgol_filter(std::span<const double> series, int window, int degree) {
    if (window < 1 || window % 2 == 0 || window < degree + 1)
        throw BadWindow("savgol_filter window must be odd and >= degree+1");
    if (degree < 0) throw BadWindow("savgol_filter degree must be >= 0");
    const std::size_t n = series.size();
    if (n < static_cast<std::size_t>(window))
        throw TooShort("savgol_filter series shorter than window");

    const int half = window / 2;

    // Precompute interior convolution weights: solve (A^T A) z = e0 over the
    // centered positions, then w_j = sum_k z_k * pos_j^k.
    const int p = degree + 1;
    std::vector<std::vector<double>> ata(p, std::vector<double>(p, 0.0));
    std::vector<double> z(p, 0.0);
    z[0] = 1.0;
    for (int j = -half; j <= half; ++j) {
        std::vector<double> powers(p);
        double pow_i = 1.0;
        for (int i = 0; i < p; ++i) {
            powers[i] = pow_i;
            pow_i *= j;
        }
        for (int r = 0; r < p; ++r)
            for (int c = 0; c < p; ++c) ata[r][c] += powers[r] * powers[c];
    }
    detail::solve_dense(ata, z);
    std::vector<double> weights(window);
    for (int j = -half; j <= half; ++j) {
        double w = 0.0, pow_i = 1.0;
        for (int i = 0; i < p; ++i) {
            w += z[i] * pow_i;
            pow_i *= j;
        }
        weights[j + half] = w;
    }

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool interior = i >= static_cast<std::size_t>(half) && i + half < n;
        if (interior) {
            double acc = 0.0;
            for (int j = -half; j <= half; ++j) acc += weights[j + half] * series[i + j];
            out[i] = acc;
        } else {
            const std::size_t lo = i >= static_cast<std::size_t>(half) ? i - half : 0;
            const std::size_t hi = std::min(n - 1, i + half);
            out[i] = detail::polyfit_eval(series, lo, hi, i, degree);
        }
    }
    return out;
}

} // namespace flas
