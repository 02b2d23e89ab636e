#include "fairshare/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fairshare/metrics.hpp"
#include "fairshare/rng.hpp"

namespace fairshare {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void require_stream(const std::ofstream& out, const std::string& path) {
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct Job {
    MechanismKind kind;
    int run;
};

struct JobResult {
    std::string summary_rows;
    std::string agent_rows;
};

JobResult run_job(const ExperimentConfig& config, const SimulationConfig& base, Job job) {
    SimulationConfig sim = base;
    sim.feedback = feedback_for(config, job.kind);
    const SimulationTrace trace = simulate(sim, job.kind, static_cast<std::uint64_t>(job.run));

    JobResult result;
    std::string& summary = result.summary_rows;
    std::string& agents = result.agent_rows;
    const char* method = to_string(job.kind);

    std::vector<double> gap_cum(sim.agents.size(), 0.0);
    double cum_loss = 0.0;
    for (const auto& rec : trace.rounds) {
        cum_loss += rec.loss.round_loss;
        summary += method;
        summary += ',';
        summary += std::to_string(job.run);
        summary += ',';
        summary += std::to_string(rec.t);
        summary += ',';
        summary += fmt(rec.loss.round_loss);
        summary += ',';
        summary += fmt(cum_loss);
        summary += '\n';
        for (std::size_t i = 0; i < rec.agents.size(); ++i) {
            const AgentRound& row = rec.agents[i];
            const AgentProfile& profile = sim.agents[i];
            gap_cum[i] += utility_eval(profile, profile.entitlement / row.load) -
                          utility_eval(profile, row.alloc / row.load);
            agents += method;
            agents += ',';
            agents += std::to_string(job.run);
            agents += ',';
            agents += std::to_string(rec.t);
            agents += ',';
            agents += std::to_string(i);
            agents += ',';
            agents += fmt(row.load);
            agents += ',';
            agents += fmt(row.alloc);
            agents += ',';
            agents += fmt(row.demand);
            agents += ',';
            agents += fmt(row.estimate);
            agents += ',';
            agents += row.ud_lower ? fmt(*row.ud_lower) : std::string();
            agents += ',';
            agents += row.ud_upper ? fmt(*row.ud_upper) : std::string();
            agents += ',';
            agents += fmt(gap_cum[i]);
            agents += '\n';
        }
    }
    return result;
}

} // namespace

std::vector<std::string> run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const SimulationConfig base = to_simulation_config(config);
    const std::string digest = base.config_digest;
    const std::vector<MechanismKind> methods = methods_to_run(config);

    std::vector<Job> jobs;
    for (MechanismKind kind : methods)
        for (int run = 0; run < config.runs; ++run) jobs.push_back({kind, run});

    std::vector<JobResult> results(jobs.size());
    unsigned workers = options.max_workers > 0 ? static_cast<unsigned>(options.max_workers)
                                               : std::thread::hardware_concurrency();
    workers = std::max(1u, std::min<unsigned>(workers, jobs.size()));

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::string> failures(jobs.size());
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::size_t idx = next.fetch_add(1);
                if (idx >= jobs.size()) return;
                try {
                    results[idx] = run_job(config, base, jobs[idx]);
                } catch (const std::exception& e) {
                    failures[idx] = e.what();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (std::size_t i = 0; i < jobs.size(); ++i)
        if (!failures[i].empty())
            throw std::runtime_error(std::string(to_string(jobs[i].kind)) + " run " +
                                     std::to_string(jobs[i].run) + ": " + failures[i]);

    std::filesystem::create_directories(options.out_dir);
    const std::string summary_path = options.out_dir + "/" + config.name + "_summary.csv";
    const std::string agents_path = options.out_dir + "/" + config.name + "_agents.csv";
    const std::string meta_path = options.out_dir + "/" + config.name + "_meta.txt";

    {
        std::ofstream out(summary_path, std::ios::binary);
        out << "# fairshare summary v1 config_digest=" << digest << "\n";
        out << "method,run,t,round_loss,cum_loss\n";
        for (const auto& r : results) out << r.summary_rows;
        require_stream(out, summary_path);
    }
    {
        std::ofstream out(agents_path, std::ios::binary);
        out << "# fairshare agents v1 config_digest=" << digest << "\n";
        out << "method,run,t,agent,load,alloc,demand,estimate,ud_lower,ud_upper,fairness_gap\n";
        for (const auto& r : results) out << r.agent_rows;
        require_stream(out, agents_path);
    }
    {
        std::ofstream out(meta_path, std::ios::binary);
        out << "config_digest=" << digest << "\nseed=" << config.seed << "\nversion=" << kVersion
            << "\n---\n"
            << render_config(config);
        require_stream(out, meta_path);
    }
    return {summary_path, agents_path, meta_path};
}

void write_report(const std::string& in_dir, const std::string& out_file) {
    // (method, t) -> cum losses across runs.
    std::map<std::pair<std::string, std::int64_t>, std::vector<double>> cells;
    std::string digest;
    bool found = false;

    for (const auto& entry : std::filesystem::directory_iterator(in_dir)) {
        const std::string path = entry.path().string();
        if (path.size() < 12 || path.substr(path.size() - 12) != "_summary.csv") continue;
        found = true;
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open " + path);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                const auto pos = line.find("config_digest=");
                if (pos != std::string::npos) {
                    const std::string d = line.substr(pos + 14);
                    if (digest.empty()) digest = d;
                    else if (digest != d)
                        throw std::runtime_error("mixed config digests in " + in_dir);
                }
                continue;
            }
            if (line.rfind("method,", 0) == 0) continue;
            std::stringstream ss(line);
            std::string method, run, t_str, round_loss, cum_loss;
            std::getline(ss, method, ',');
            std::getline(ss, run, ',');
            std::getline(ss, t_str, ',');
            std::getline(ss, round_loss, ',');
            std::getline(ss, cum_loss, ',');
            cells[{method, std::stoll(t_str)}].push_back(std::stod(cum_loss));
        }
    }
    if (!found) throw std::runtime_error("no *_summary.csv files in " + in_dir);

    std::ofstream out(out_file, std::ios::binary);
    out << "# fairshare report v1 config_digest=" << digest << "\n";
    out << "method,t,mean_cum_loss,stderr_cum_loss,runs\n";
    for (const auto& [key, values] : cells) {
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        const double stderr_v =
            values.size() > 1
                ? std::sqrt(var / (static_cast<double>(values.size() - 1) *
                                   static_cast<double>(values.size())))
                : 0.0;
        out << key.first << ',' << key.second << ',' << fmt(mean) << ',' << fmt(stderr_v) << ','
            << values.size() << '\n';
    }
    require_stream(out, out_file);
}

std::vector<BenchPoint> bench_tree(const ExperimentConfig& config,
                                   const std::vector<std::int64_t>& checkpoints) {
    const SimulationConfig sim = to_simulation_config(config);
    TreeSettings settings;
    settings.unit_demand_cap = sim.unit_demand_cap;
    settings.threshold = sim.agents.front().payoff.threshold;
    settings.lipschitz = sim.tree_lipschitz;
    settings.n_agents = static_cast<int>(sim.agents.size());
    settings.delta = sim.delta;
    settings.beta_scale = sim.tree_beta_scale;
    TreeLearner learner(settings);

    RngStream rng(derive_seed(config.seed, 0, 0, "bench"));
    const PayoffSpec& payoff = sim.agents.front().payoff;
    std::vector<BenchPoint> out;
    std::int64_t fed = 0;
    for (std::int64_t target : checkpoints) {
        while (fed < target) {
            ++fed;
            learner.begin_round(fed);
            const double jitter = rng.uniform(0.0, 0.05 * sim.unit_demand_cap);
            const double probe =
                std::clamp(learner.recommend() + jitter - 0.025 * sim.unit_demand_cap, 0.0,
                           sim.unit_demand_cap);
            const double load = rng.uniform(sim.load_lo, sim.load_hi);
            auto fb = sample_reward(payoff, FeedbackMode::BernoulliAggregate, probe * load, load,
                                    sim.noise_sigma, rng);
            learner.record(probe, fb.reward, fb.sigma);
        }
        constexpr int kReps = 2000;
        volatile double sink = 0.0;
        const auto start = std::chrono::steady_clock::now();
        for (int rep = 0; rep < kReps; ++rep) sink = sink + learner.recommend();
        const auto stop = std::chrono::steady_clock::now();
        const double secs = std::chrono::duration<double>(stop - start).count() / kReps;
        out.push_back({target, secs});
    }
    return out;
}

} // namespace fairshare
