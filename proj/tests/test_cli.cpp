#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "flas/textio.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = FLAS_CLI_PATH;

int run_cli(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("flas_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string small_config(const fs::path& out_dir) {
    return std::string(R"cfg(
[sim]
mu0 = 20000
kappa = 1.2e-5
base_service_time = 0.012
seed = 7

[decider]
h = 4
majority = 3

[sla]
max_rt_ms = 1000

[forecasting]
seasonal_period = 150

[profiling]
notif_rates = 8000, 11000
duration = 600
period = 150
base_sub_rate = 2000
peak_sub_rate = 10000
initial_subs = 45000

[run]
scenarios = peak
variants = flas, no_scaling
seeds = 2
out_dir = )cfg") +
           out_dir.string() + R"cfg(

[workload peak]
kind = stationary_peak
duration = 300
period = 150
peak_sub_rate = 10000
initial_subs = 45000
)cfg";
}

} // namespace

TEST_CASE("cli exit codes", "[cli]") {
    SECTION("missing config file exits 2") {
        CHECK(run_cli("profile --config /nonexistent/nope.cfg") == 2);
    }
    SECTION("bad usage exits 2") {
        CHECK(run_cli("profile") == 2);
        CHECK(run_cli("frobnicate --config x") == 2);
    }
    SECTION("profiling with a workload that never scales exits 3") {
        TempDir tmp;
        const fs::path cfg = tmp.path / "flat.cfg";
        std::ofstream(cfg) << "[profiling]\nnotif_rates = 100\nduration = 600\nperiod = 150\n"
                              "base_sub_rate = 0\npeak_sub_rate = 10\ninitial_subs = 0\n"
                              "[run]\nout_dir = " +
                                  (tmp.path / "out").string() + "\n";
        CHECK(run_cli("profile --config " + cfg.string()) == 3);
    }
    SECTION("training on rank-deficient data exits 4") {
        TempDir tmp;
        const fs::path out = tmp.path / "out";
        fs::create_directories(out);
        const fs::path cfg = tmp.path / "c.cfg";
        std::ofstream(cfg) << "[run]\nout_dir = " + out.string() + "\n";
        // All rows share identical predictors.
        std::ofstream(out / "scaling_times.csv") << "N,S,T_sa\n10000,50000,2\n10000,50000,2.1\n"
                                                    "10000,50000,1.9\n10000,50000,2\n";
        std::ofstream(out / "rt_series.csv") << "t,rt\n";
        std::ofstream(out / "perf_rows.csv") << "x\n";
        CHECK(run_cli("train --config " + cfg.string()) == 4);
    }
}

TEST_CASE("cli pipeline: profile, train, run, evaluate", "[cli][pipeline]") {
    TempDir tmp;
    const fs::path out = tmp.path / "out";
    const fs::path cfg = tmp.path / "run.cfg";
    std::ofstream(cfg) << small_config(out);

    REQUIRE(run_cli("profile --config " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "scaling_times.csv"));
    REQUIRE(fs::exists(out / "rt_series.csv"));
    REQUIRE(fs::exists(out / "perf_rows.csv"));

    REQUIRE(run_cli("train --config " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "scaling_time.model"));
    REQUIRE(fs::exists(out / "trend.model"));
    REQUIRE(fs::exists(out / "perf_rt.model"));
    REQUIRE(fs::exists(out / "perf_x.model"));
    REQUIRE(fs::exists(out / "fit_report.txt"));

    SECTION("training is idempotent: byte-identical model files") {
        const std::string before = flas::read_file((out / "scaling_time.model").string()) +
                                   flas::read_file((out / "trend.model").string()) +
                                   flas::read_file((out / "perf_rt.model").string());
        REQUIRE(run_cli("train --config " + cfg.string()) == 0);
        const std::string after = flas::read_file((out / "scaling_time.model").string()) +
                                  flas::read_file((out / "trend.model").string()) +
                                  flas::read_file((out / "perf_rt.model").string());
        REQUIRE(before == after);
    }

    REQUIRE(run_cli("run --config " + cfg.string() + " --all") == 0);
    REQUIRE(fs::exists(out / "trace_peak_flas_0.csv"));
    REQUIRE(fs::exists(out / "trace_peak_no_scaling_1.csv"));
    REQUIRE(fs::exists(out / "events_peak_flas_0.csv"));

    SECTION("reruns are byte-identical") {
        const std::string before = flas::read_file((out / "trace_peak_flas_0.csv").string());
        REQUIRE(run_cli("run --config " + cfg.string() + " --scenario peak --variant flas") == 0);
        const std::string after = flas::read_file((out / "trace_peak_flas_0.csv").string());
        REQUIRE(before == after);
    }

    SECTION("no_scaling traces hold the matcher column constant") {
        const std::string csv = flas::read_file((out / "trace_peak_no_scaling_0.csv").string());
        std::istringstream in(csv);
        std::string line;
        std::getline(in, line); // header
        while (std::getline(in, line)) {
            const auto fields = flas::detail::split_csv_line(line);
            REQUIRE(fields[4] == "1");
        }
    }

    REQUIRE(run_cli("evaluate --config " + cfg.string()) == 0);
    REQUIRE(fs::exists(out / "report.csv"));
    const std::string report = flas::read_file((out / "report.csv").string());
    CHECK(report.find("peak,flas") != std::string::npos);
    CHECK(report.find("peak,no_scaling") != std::string::npos);
    // The no_scaling row has no events, so the scaling-time columns read NA.
    CHECK(report.find("NA") != std::string::npos);
}
