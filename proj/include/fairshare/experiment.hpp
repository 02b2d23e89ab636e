#pragma once

#include <string>
#include <vector>

#include "fairshare/config.hpp"

namespace fairshare {

inline constexpr const char* kVersion = "fairshare 0.1.0";

struct RunOptions {
    std::string out_dir = ".";
    int max_workers = 0;  // 0 = hardware concurrency
};

struct BenchPoint {
    std::int64_t points = 0;
    double mean_latency_s = 0.0;
};

// Runs every (method, run) pair of the experiment and writes
//   <out>/<name>_summary.csv   method,run,t,round_loss,cum_loss
//   <out>/<name>_agents.csv    per-agent estimates, bounds, fairness
//   <out>/<name>_meta.txt      digest, seed, version, canonical config
// Identical inputs reproduce the files byte for byte. Returns written paths.
std::vector<std::string> run_experiment(const ExperimentConfig& config, const RunOptions& options);

// Aggregates every *_summary.csv under `in_dir` into mean and standard error
// of the cumulative loss per (method, t). Fails on mixed config digests.
void write_report(const std::string& in_dir, const std::string& out_file);

// Measures mean recommendation latency of the tree estimator at growing
// data sizes (100, 1000, 10000 recorded points by default).
std::vector<BenchPoint> bench_tree(const ExperimentConfig& config,
                                   const std::vector<std::int64_t>& checkpoints = {100, 1000,
                                                                                   10000});

} // namespace fairshare
