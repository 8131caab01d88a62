#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "flas/metrics.hpp"
#include "flas/sim.hpp"

using namespace flas;

namespace {

MetricsParams quiet() {
    MetricsParams mp;
    mp.noise_sigma = 0.0;
    mp.outlier_prob = 0.0;
    return mp;
}

} // namespace

TEST_CASE("emit_metrics maps simulator ground truth onto the channels") {
    SimParams sp;
    sp.mu0 = 20000.0;
    sp.kappa = 1e-5;

    SECTION("idle system") {
        SystemState s = initial_state(sp, 0.0);
        WorkloadPoint wp{1, 0.0, 0.0, 0.0};
        Rng rng(1);
        const MetricSample m = emit_metrics(s, wp, sp, quiet(), rng);
        CHECK(m.cpu_user == 0.0);
        CHECK(m.cpu_idle == 100.0);
        CHECK(m.net_recv == 0.0);
        CHECK(m.cpu_wait == 0.0);
    }
    SECTION("half utilization reads 50% user cpu") {
        SystemState s = initial_state(sp, 0.0);
        WorkloadPoint wp{1, 10000.0, 0.0, 0.0};
        Rng rng(1);
        const MetricSample m = emit_metrics(s, wp, sp, quiet(), rng);
        CHECK(m.cpu_user == Catch::Approx(50.0));
    }
    SECTION("same seed and state reproduce the sample exactly") {
        MetricsParams mp; // noise on
        SystemState s = initial_state(sp, 60000.0);
        s.queue = 2500.0;
        s.throughput = 9000.0;
        WorkloadPoint wp{5, 10000.0, 700.0, 300.0};
        Rng a(42), b(42);
        const MetricSample ma = emit_metrics(s, wp, sp, mp, a);
        const MetricSample mb = emit_metrics(s, wp, sp, mp, b);
        for (auto ch : kMetricChannels) REQUIRE(ma.*ch == mb.*ch);
    }
    SECTION("cpu percentages stay a partition of 100") {
        MetricsParams mp;
        SystemState s = initial_state(sp, 150000.0);
        s.queue = 9000.0;
        Rng rng(7);
        for (int i = 0; i < 200; ++i) {
            WorkloadPoint wp{i, 10000.0, 1000.0, 1000.0};
            const MetricSample m = emit_metrics(s, wp, sp, mp, rng);
            const double sum = m.cpu_user + m.cpu_system + m.cpu_idle + m.cpu_wait;
            REQUIRE(sum == Catch::Approx(100.0).margin(1e-9));
            REQUIRE(m.cpu_user >= 0.0);
            REQUIRE(m.cpu_idle >= 0.0);
        }
    }
    SECTION("memory grows with stored subscriptions and backlog") {
        Rng rng(1);
        SystemState calm = initial_state(sp, 10000.0);
        SystemState busy = initial_state(sp, 200000.0);
        busy.queue = 8000.0;
        WorkloadPoint wp{1, 10000.0, 0.0, 0.0};
        const MetricSample a = emit_metrics(calm, wp, sp, quiet(), rng);
        const MetricSample b = emit_metrics(busy, wp, sp, quiet(), rng);
        CHECK(b.mem_used > a.mem_used);
        CHECK(b.mem_free < a.mem_free);
    }
}

TEST_CASE("preprocess removes outliers and averages the rest") {
    SECTION("constant window is a fixed point") {
        SimParams sp;
        SystemState s = initial_state(sp, 50000.0);
        WorkloadPoint wp{1, 8000.0, 0.0, 0.0};
        Rng rng(1);
        const MetricSample m = emit_metrics(s, wp, sp, quiet(), rng);
        const std::vector<MetricSample> window(5, m);
        const CleanSample c = preprocess(window, 3.0);
        CHECK_FALSE(c.outlier_flag);
        for (auto ch : kMetricChannels) CHECK(c.avg.*ch == Catch::Approx(m.*ch));

        // Idempotence: preprocessing the averaged sample again changes nothing.
        const std::vector<MetricSample> again(3, c.avg);
        const CleanSample c2 = preprocess(again, 3.0);
        for (auto ch : kMetricChannels) CHECK(c2.avg.*ch == Catch::Approx(c.avg.*ch));
    }
    SECTION("a single spike among constants is dropped via the MAD fallback") {
        MetricSample base;
        base.ctx_switches = 10.0;
        std::vector<MetricSample> window(5, base);
        window[4].ctx_switches = 1000.0;
        const CleanSample c = preprocess(window, 3.0);
        CHECK(c.avg.ctx_switches == Catch::Approx(10.0));
    }
    SECTION("compound memory percentage") {
        MetricSample m;
        m.mem_used = 1.0e9;
        m.mem_free = 3.0e9;
        m.mem_cache = 0.0;
        m.mem_buffers = 0.0;
        const std::vector<MetricSample> window(1, m);
        const CleanSample c = preprocess(window, 3.0);
        CHECK(c.mem_used_pct == Catch::Approx(25.0));
    }
    SECTION("empty window is rejected") {
        const std::vector<MetricSample> window;
        CHECK_THROWS_AS(preprocess(window, 3.0), EmptyWindow);
    }
    SECTION("matches a brute-force oracle on windows with positive MAD") {
        Rng rng(55);
        for (int trial = 0; trial < 30; ++trial) {
            const int n = 3 + static_cast<int>(rng.uniform01() * 6); // 3..8
            std::vector<MetricSample> window(n);
            std::vector<double> vals(n);
            for (int i = 0; i < n; ++i) {
                vals[i] = rng.uniform(10, 20);
                if (rng.uniform01() < 0.2) vals[i] *= 5.0; // injected outlier
                window[i].ctx_switches = vals[i];
            }
            // Oracle: recompute median, MAD and the filtered mean directly.
            std::vector<double> sorted = vals;
            std::sort(sorted.begin(), sorted.end());
            const double med = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
            std::vector<double> dev;
            for (double v : vals) dev.push_back(std::abs(v - med));
            std::vector<double> dev_sorted = dev;
            std::sort(dev_sorted.begin(), dev_sorted.end());
            const double mad =
                n % 2 ? dev_sorted[n / 2] : 0.5 * (dev_sorted[n / 2 - 1] + dev_sorted[n / 2]);
            if (mad <= 0.0) continue;
            double acc = 0.0;
            int kept = 0;
            for (int i = 0; i < n; ++i)
                if (dev[i] <= 3.0 * mad) {
                    acc += vals[i];
                    ++kept;
                }
            const double expected = kept > 0 ? acc / kept : med;

            const CleanSample c = preprocess(window, 3.0);
            REQUIRE(c.avg.ctx_switches == Catch::Approx(expected).margin(1e-9));
        }
    }
}
