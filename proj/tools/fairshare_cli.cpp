#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "fairshare/experiment.hpp"

namespace {

int cmd_run(const std::string& config_path, const std::string& out_dir, long long seed,
            int runs, const std::string& method, int workers) {
    fairshare::ParsedConfig parsed = fairshare::parse_config_file(config_path);
    if (seed >= 0) parsed.config.seed = static_cast<std::uint64_t>(seed);
    if (runs > 0) parsed.config.runs = runs;
    if (!method.empty()) {
        const auto kind = fairshare::mechanism_from_string(method);
        if (!kind) parsed.errors.push_back("unknown method '" + method + "'");
        else parsed.config.methods = {*kind};
    }
    if (!parsed.ok()) {
        for (const auto& err : parsed.errors) std::cerr << "config error: " << err << "\n";
        return 2;
    }
    fairshare::RunOptions options;
    options.out_dir = out_dir;
    options.max_workers = workers;
    const auto files = fairshare::run_experiment(parsed.config, options);
    for (const auto& path : files) std::cout << path << "\n";
    return 0;
}

int cmd_bench(const std::string& config_path) {
    fairshare::ParsedConfig parsed = fairshare::parse_config_file(config_path);
    if (!parsed.ok()) {
        for (const auto& err : parsed.errors) std::cerr << "config error: " << err << "\n";
        return 2;
    }
    const auto points = fairshare::bench_tree(parsed.config);
    std::printf("points,mean_latency_s\n");
    for (const auto& p : points) std::printf("%lld,%.6g\n", static_cast<long long>(p.points),
                                             p.mean_latency_s);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"max-min fair allocation simulator with online demand learning"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", method, report_in, report_out;
    long long seed = -1;
    int runs = 0, workers = 0;

    auto* run = app.add_subcommand("run", "run an experiment and write CSVs");
    run->add_option("--config", config_path, "experiment config file")->required();
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--seed", seed, "override the base seed");
    run->add_option("--runs", runs, "override the number of runs");
    run->add_option("--method", method, "run a single method");
    run->add_option("--workers", workers, "worker pool size (0 = auto)");

    auto* report = app.add_subcommand("report", "aggregate run CSVs into mean/stderr");
    report->add_option("--in", report_in, "directory with *_summary.csv files")->required();
    report->add_option("--out", report_out, "output CSV path")->required();

    auto* bench = app.add_subcommand("bench-tree", "time tree recommendations");
    bench->add_option("--config", config_path, "experiment config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, runs, method, workers);
        if (report->parsed()) {
            fairshare::write_report(report_in, report_out);
            std::cout << report_out << "\n";
            return 0;
        }
        if (bench->parsed()) return cmd_bench(config_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
