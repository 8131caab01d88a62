#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "flas/forecasters.hpp"
#include "flas/regression.hpp"
#include "flas/rng.hpp"

using namespace flas;

namespace {

// Independent normal-equations oracle for the 2-predictor case, solved by
// Cramer's rule on the centered system in long double.
struct OracleFit {
    double b0, b1, b2;
};

OracleFit ols_oracle(const std::vector<ScalingTimeRow>& rows) {
    long double mx1 = 0, mx2 = 0, my = 0;
    const long double n = static_cast<long double>(rows.size());
    for (const auto& r : rows) {
        mx1 += r.notif_rate;
        mx2 += r.stored_subs;
        my += r.t_sa;
    }
    mx1 /= n;
    mx2 /= n;
    my /= n;
    long double s11 = 0, s12 = 0, s22 = 0, c1 = 0, c2 = 0;
    for (const auto& r : rows) {
        const long double x1 = r.notif_rate - mx1, x2 = r.stored_subs - mx2;
        const long double yc = r.t_sa - my;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        c1 += x1 * yc;
        c2 += x2 * yc;
    }
    const long double det = s11 * s22 - s12 * s12;
    const long double b1 = (c1 * s22 - c2 * s12) / det;
    const long double b2 = (c2 * s11 - c1 * s12) / det;
    return {static_cast<double>(my - b1 * mx1 - b2 * mx2), static_cast<double>(b1),
            static_cast<double>(b2)};
}

} // namespace

TEST_CASE("fit_scaling_time recovers planted coefficients on noiseless data") {
    std::vector<ScalingTimeRow> rows;
    Rng rng(21);
    for (int i = 0; i < 40; ++i) {
        const double n = 5000.0 + 10000.0 * rng.uniform01();
        const double s = 20000.0 + 250000.0 * rng.uniform01();
        rows.push_back({n, s, 1.0 + 5e-5 * n + 1e-5 * s});
    }
    const LinearModel m = fit_scaling_time(rows);
    REQUIRE(m.predictor_names == std::vector<std::string>{"N", "S"});
    CHECK(std::abs(m.intercept - 1.0) < 1e-6);
    CHECK(std::abs(m.coefficients[0] - 5e-5) < 1e-6);
    CHECK(std::abs(m.coefficients[1] - 1e-5) < 1e-6);
    CHECK(m.r2 == Catch::Approx(1.0));

    SECTION("matches the independent oracle") {
        const OracleFit o = ols_oracle(rows);
        CHECK(std::abs(m.intercept - o.b0) < 1e-9);
        CHECK(std::abs(m.coefficients[0] - o.b1) < 1e-12);
        CHECK(std::abs(m.coefficients[1] - o.b2) < 1e-12);
    }
    SECTION("satisfies the normal equations") {
        // X^T (y - X beta) = 0, relative to X^T y.
        long double g0 = 0, g1 = 0, g2 = 0, n0 = 0, n1 = 0, n2 = 0;
        for (const auto& r : rows) {
            const double e = r.t_sa - m.predict(std::vector<double>{r.notif_rate, r.stored_subs});
            g0 += e;
            g1 += e * r.notif_rate;
            g2 += e * r.stored_subs;
            n0 += std::abs(r.t_sa);
            n1 += std::abs(r.t_sa * r.notif_rate);
            n2 += std::abs(r.t_sa * r.stored_subs);
        }
        CHECK(std::abs(static_cast<double>(g0 / n0)) < 1e-7);
        CHECK(std::abs(static_cast<double>(g1 / n1)) < 1e-7);
        CHECK(std::abs(static_cast<double>(g2 / n2)) < 1e-7);
    }
}

TEST_CASE("fit_scaling_time error cases") {
    SECTION("identical predictor rows are rank deficient") {
        std::vector<ScalingTimeRow> rows(10, {10000.0, 50000.0, 2.0});
        CHECK_THROWS_AS(fit_scaling_time(rows), RankDeficient);
    }
    SECTION("fewer than three rows") {
        std::vector<ScalingTimeRow> rows{{1, 2, 3}, {4, 5, 6}};
        CHECK_THROWS_AS(fit_scaling_time(rows), InsufficientData);
    }
    SECTION("constant target gives a pure intercept") {
        std::vector<ScalingTimeRow> rows;
        Rng rng(3);
        for (int i = 0; i < 20; ++i)
            rows.push_back({rng.uniform(1000, 20000), rng.uniform(0, 300000), 2.5});
        const LinearModel m = fit_scaling_time(rows);
        CHECK(std::abs(m.coefficients[0]) < 1e-12);
        CHECK(std::abs(m.coefficients[1]) < 1e-12);
        CHECK(m.intercept == Catch::Approx(2.5));
    }
}

TEST_CASE("forecast_scaling_time evaluates and clamps") {
    LinearModel m;
    m.intercept = 1.0;
    m.coefficients = {5e-5, 1e-5};
    m.predictor_names = {"N", "S"};
    CHECK(forecast_scaling_time(m, 10000, 100000, 1.0) == Catch::Approx(2.5));
    CHECK(forecast_scaling_time(m, 0, 0, 1.0) == Catch::Approx(1.0)); // intercept

    LinearModel neg;
    neg.intercept = -5.0;
    neg.coefficients = {0.0, 0.0};
    neg.predictor_names = {"N", "S"};
    CHECK(forecast_scaling_time(neg, 10000, 100000, 1.0) == Catch::Approx(1.0)); // clamped to dt
}

TEST_CASE("kfold_cv scores a perfect model as r2 = 1") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        const double a = rng.uniform(-5, 5), b = rng.uniform(-5, 5);
        x.push_back({a, b});
        y.push_back(3.0 + 2.0 * a - 0.5 * b);
    }
    const CvScore s = kfold_cv(x, y, {"a", "b"}, 10);
    CHECK(std::abs(s.r2 - 1.0) < 1e-9);
    CHECK(s.mae < 1e-9);
}

TEST_CASE("kfold_cv shows no skill on an independent target") {
    std::vector<std::vector<double>> x;
    std::vector<double> y;
    Rng rng(77);
    for (int i = 0; i < 1000; ++i) {
        x.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1)});
        y.push_back(rng.gaussian());
    }
    const CvScore s = kfold_cv(x, y, {"a", "b"}, 10);
    CHECK(s.r2 <= 0.1);
}

TEST_CASE("kfold_cv rejects too few rows") {
    std::vector<std::vector<double>> x{{1.0}, {2.0}};
    std::vector<double> y{1.0, 2.0};
    CHECK_THROWS_AS(kfold_cv(x, y, {"a"}, 3), TooFewRows);
    CHECK_THROWS_AS(kfold_cv(x, y, {"a"}, 1), TooFewRows);
}

TEST_CASE("linear model text round trip is bit exact") {
    Rng rng(1010);
    for (int trial = 0; trial < 20; ++trial) {
        LinearModel m;
        m.intercept = rng.gaussian(0, 1e3);
        m.predictor_names = {"N", "S", "x3"};
        for (int j = 0; j < 3; ++j) m.coefficients.push_back(rng.gaussian(0, 1e-4));
        m.r2 = rng.uniform01();
        m.mae = rng.uniform(0, 10);

        const LinearModel back = linear_model_from_text(to_text(m));
        REQUIRE(back.predictor_names == m.predictor_names);
        REQUIRE(back.intercept == m.intercept);
        for (int j = 0; j < 3; ++j) REQUIRE(back.coefficients[j] == m.coefficients[j]);
        REQUIRE(back.r2 == m.r2);
        REQUIRE(back.mae == m.mae);
    }
}

TEST_CASE("fit_performance_model recovers a planted linear map") {
    std::vector<PerfRow> rows;
    Rng rng(9);
    for (int i = 0; i < 400; ++i) {
        PerfRow r;
        r.sample.avg.cpu_user = rng.uniform(0, 100);
        r.sample.avg.cpu_system = rng.uniform(0, 10);
        r.sample.avg.cpu_wait = rng.uniform(0, 50);
        r.sample.avg.ctx_switches = rng.uniform(0, 20000);
        r.sample.avg.intr = rng.uniform(0, 4000);
        r.sample.mem_used_pct = rng.uniform(0, 100);
        r.sample.avg.mem_free = rng.uniform(0, 4e9);
        r.sample.avg.mem_cache = rng.uniform(0, 1e9);
        r.sample.avg.disk_read = rng.uniform(0, 1e6);
        r.sample.avg.disk_write = rng.uniform(0, 1e6);
        r.sample.avg.net_recv = rng.uniform(0, 1e7);
        r.sample.avg.net_send = rng.uniform(0, 1e7);
        r.rt = 0.01 * r.sample.mem_used_pct + 1e-5 * r.sample.avg.ctx_switches;
        r.throughput = 0.5 * r.sample.avg.net_send;
        rows.push_back(r);
    }
    const PerformanceModels pm = fit_performance_model(rows);

    for (std::size_t j = 0; j < kPerfPredictorNames.size(); ++j) {
        const std::string name = kPerfPredictorNames[j];
        const double c = pm.rt_model.coefficients[j];
        if (name == "mem_used_pct")
            CHECK(std::abs(c - 0.01) < 1e-6);
        else if (name == "ctx_switches")
            CHECK(std::abs(c - 1e-5) < 1e-6);
        else
            CHECK(std::abs(c) < 1e-6);
    }

    SECTION("estimate_rt evaluates and clamps at zero") {
        CleanSample z;
        LinearModel zero;
        zero.predictor_names.assign(kPerfPredictorNames.begin(), kPerfPredictorNames.end());
        zero.coefficients.assign(kPerfPredictorNames.size(), 0.0);
        CHECK(estimate_rt(zero, z) == 0.0);

        CleanSample s;
        s.mem_used_pct = 50.0;
        CHECK(estimate_rt(pm.rt_model, s) == Catch::Approx(0.5).margin(1e-4));

        LinearModel negative = zero;
        negative.intercept = -1.0;
        CHECK(estimate_rt(negative, s) == 0.0);
    }

    SECTION("kpi ranking puts the planted driver first") {
        std::vector<std::vector<double>> x;
        for (const auto& r : rows) x.push_back(perf_predictors(r.sample));
        const auto ranking = kpi_ranking(pm.rt_model, x);
        CHECK(ranking.front().first == "mem_used_pct");
    }

    SECTION("single repeated row is rejected") {
        std::vector<PerfRow> bad(40, rows.front());
        CHECK_THROWS_AS(fit_performance_model(bad), RankDeficient);
        std::vector<PerfRow> few(3, rows.front());
        CHECK_THROWS_AS(fit_performance_model(few), InsufficientData);
    }
}

TEST_CASE("estimate_error_stats reports a finite p99 on held-out data") {
    std::vector<PerfRow> rows;
    Rng rng(4);
    for (int i = 0; i < 300; ++i) {
        PerfRow r;
        r.sample.mem_used_pct = rng.uniform(1, 99);
        r.sample.avg.cpu_user = rng.uniform(1, 99);
        r.sample.avg.cpu_system = rng.uniform(0, 9);
        r.sample.avg.cpu_wait = rng.uniform(0, 40);
        r.sample.avg.ctx_switches = rng.uniform(100, 9000);
        r.sample.avg.intr = rng.uniform(100, 2000);
        r.sample.avg.mem_free = rng.uniform(1e8, 3e9);
        r.sample.avg.mem_cache = rng.uniform(1e8, 9e8);
        r.sample.avg.disk_read = rng.uniform(0, 1e5);
        r.sample.avg.disk_write = rng.uniform(0, 1e5);
        r.sample.avg.net_recv = rng.uniform(0, 1e6);
        r.sample.avg.net_send = rng.uniform(0, 1e6);
        r.rt = 0.1 + 0.004 * r.sample.mem_used_pct + 0.002 * rng.gaussian();
        rows.push_back(r);
    }
    const auto split = rows.size() * 4 / 5;
    const std::vector<PerfRow> train(rows.begin(), rows.begin() + split);
    const std::vector<PerfRow> holdout(rows.begin() + split, rows.end());
    const PerformanceModels pm = fit_performance_model(train);
    const EstimateErrorStats st = estimate_error_stats(pm.rt_model, holdout);
    CHECK(std::isfinite(st.p99));
    CHECK(st.p99 >= st.p90);
    CHECK(st.p90 >= st.p50);
    CHECK(st.p99 < 0.5);
    std::size_t total = 0;
    for (std::size_t c : st.histogram) total += c;
    CHECK(total == holdout.size());
}
