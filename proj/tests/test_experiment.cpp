#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fairshare/experiment.hpp"

using namespace fairshare;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig tiny_config(const std::string& name) {
    auto parsed = parse_config_text(
        "name = " + name +
        "\nagents = 2\nhorizon = 12\nruns = 2\nmethods = entitlement,det_nsp_bs\n"
        "payoff = tanh\nunit_demand_lo = 1e-5\nunit_demand_hi = 1e-4\n");
    REQUIRE(parsed.ok());
    return parsed.config;
}

} // namespace

TEST_CASE("run_experiment writes reproducible CSVs") {
    const std::string dir_a = "exp_out_a";
    const std::string dir_b = "exp_out_b";
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    const ExperimentConfig config = tiny_config("tiny");

    RunOptions opts_a;
    opts_a.out_dir = dir_a;
    opts_a.max_workers = 2;
    const auto files_a = run_experiment(config, opts_a);
    REQUIRE(files_a.size() == 3);

    RunOptions opts_b;
    opts_b.out_dir = dir_b;
    opts_b.max_workers = 1;  // worker count must not affect the bytes
    const auto files_b = run_experiment(config, opts_b);

    for (std::size_t i = 0; i < files_a.size(); ++i)
        CHECK(slurp(files_a[i]) == slurp(files_b[i]));

    // Summary rows: horizon per run per method, cum_loss non-decreasing.
    std::ifstream in(files_a[0]);
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("# fairshare summary", 0) == 0);
    std::getline(in, line);
    CHECK(line == "method,run,t,round_loss,cum_loss");
    int rows = 0;
    double prev_cum = 0.0;
    std::string prev_key;
    while (std::getline(in, line)) {
        ++rows;
        std::stringstream ss(line);
        std::string method, run, t, round_loss, cum;
        std::getline(ss, method, ',');
        std::getline(ss, run, ',');
        std::getline(ss, t, ',');
        std::getline(ss, round_loss, ',');
        std::getline(ss, cum, ',');
        const std::string key = method + "/" + run;
        if (key == prev_key) CHECK(std::stod(cum) >= prev_cum - 1e-12);
        prev_key = key;
        prev_cum = std::stod(cum);
    }
    CHECK(rows == 2 * 2 * 12);

    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
}

TEST_CASE("report aggregates means and flags mixed digests") {
    const std::string dir = "exp_out_report";
    std::filesystem::remove_all(dir);
    const ExperimentConfig config = tiny_config("tiny");
    RunOptions opts;
    opts.out_dir = dir;
    run_experiment(config, opts);

    const std::string report_path = dir + "/report.csv";
    write_report(dir, report_path);
    std::ifstream in(report_path);
    std::string line;
    std::getline(in, line);
    CHECK(line.find("config_digest=") != std::string::npos);
    std::getline(in, line);
    CHECK(line == "method,t,mean_cum_loss,stderr_cum_loss,runs");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 2 * 12);  // (method, t) pairs

    // A second experiment with a different seed poisons the directory.
    ExperimentConfig other = config;
    other.name = "tiny2";
    other.seed = 99;
    run_experiment(other, opts);
    CHECK_THROWS(write_report(dir, report_path));

    std::filesystem::remove_all(dir);
}

TEST_CASE("single run reports zero standard error") {
    const std::string dir = "exp_out_single";
    std::filesystem::remove_all(dir);
    ExperimentConfig config = tiny_config("solo");
    config.runs = 1;
    RunOptions opts;
    opts.out_dir = dir;
    run_experiment(config, opts);
    const std::string report_path = dir + "/report.csv";
    write_report(dir, report_path);
    std::ifstream in(report_path);
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::stringstream ss(line);
        std::string method, t, mean, se, runs;
        std::getline(ss, method, ',');
        std::getline(ss, t, ',');
        std::getline(ss, mean, ',');
        std::getline(ss, se, ',');
        std::getline(ss, runs, ',');
        CHECK(std::stod(se) == 0.0);
        CHECK(runs == "1");
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("tree benchmark latencies are positive and grow mildly") {
    auto parsed = parse_config_text(
        "agents = 2\npayoff = tanh\nmethods = tree_nsp\nfeedback = bernoulli\n");
    REQUIRE(parsed.ok());
    const auto points = bench_tree(parsed.config, {100, 400});
    REQUIRE(points.size() == 2);
    CHECK(points[0].points == 100);
    CHECK(points[0].mean_latency_s > 0.0);
    CHECK(points[1].mean_latency_s > 0.0);
}
