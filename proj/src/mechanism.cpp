#include "fairshare/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairshare/learners_det.hpp"
#include "fairshare/mmf.hpp"
#include "fairshare/rng.hpp"

namespace fairshare {

const char* to_string(MechanismKind kind) {
    switch (kind) {
        case MechanismKind::Entitlement: return "entitlement";
        case MechanismKind::DetSpGrid: return "det_sp_grid";
        case MechanismKind::DetSpBisect: return "det_sp_bs";
        case MechanismKind::DetNspBisect: return "det_nsp_bs";
        case MechanismKind::GlmSp: return "glm_sp";
        case MechanismKind::GlmNsp: return "glm_nsp";
        case MechanismKind::TreeSp: return "tree_sp";
        case MechanismKind::TreeNsp: return "tree_nsp";
    }
    return "?";
}

std::optional<MechanismKind> mechanism_from_string(const std::string& name) {
    static const std::pair<const char*, MechanismKind> table[] = {
        {"entitlement", MechanismKind::Entitlement}, {"det_sp_grid", MechanismKind::DetSpGrid},
        {"det_sp_bs", MechanismKind::DetSpBisect},   {"det_nsp_bs", MechanismKind::DetNspBisect},
        {"glm_sp", MechanismKind::GlmSp},            {"glm_nsp", MechanismKind::GlmNsp},
        {"tree_sp", MechanismKind::TreeSp},          {"tree_nsp", MechanismKind::TreeNsp},
    };
    for (const auto& [n, k] : table)
        if (name == n) return k;
    return std::nullopt;
}

bool is_bracketed(MechanismKind kind) {
    return kind == MechanismKind::DetSpGrid || kind == MechanismKind::DetSpBisect ||
           kind == MechanismKind::GlmSp || kind == MechanismKind::TreeSp;
}

bool is_deterministic_only(MechanismKind kind) {
    return kind == MechanismKind::DetSpGrid || kind == MechanismKind::DetSpBisect ||
           kind == MechanismKind::DetNspBisect;
}

namespace {

enum class LearnerFamily { None, Grid, Bisect, Glm, Tree };

LearnerFamily family_of(MechanismKind kind) {
    switch (kind) {
        case MechanismKind::Entitlement: return LearnerFamily::None;
        case MechanismKind::DetSpGrid: return LearnerFamily::Grid;
        case MechanismKind::DetSpBisect:
        case MechanismKind::DetNspBisect: return LearnerFamily::Bisect;
        case MechanismKind::GlmSp:
        case MechanismKind::GlmNsp: return LearnerFamily::Glm;
        case MechanismKind::TreeSp:
        case MechanismKind::TreeNsp: return LearnerFamily::Tree;
    }
    return LearnerFamily::None;
}

// One simulation in flight: environment streams, per-agent learners, trace.
struct Session {
    const SimulationConfig& cfg;
    MechanismKind kind;
    std::uint64_t run;
    LearnerFamily family;
    int n;

    std::vector<double> entitlements;
    std::vector<double> true_unit_demands;
    std::vector<double> thresholds;  // as reported to the mechanism

    std::vector<GridSearchLearner> grid;
    std::vector<BinarySearchLearner> bisect;
    std::vector<GlmLearner> glm;
    std::vector<TreeLearner> tree;

    SimulationTrace trace;

    Session(const SimulationConfig& c, MechanismKind k, std::uint64_t r)
        : cfg(c), kind(k), run(r), family(family_of(k)), n(static_cast<int>(c.agents.size())) {
        if (n == 0) throw std::invalid_argument("simulation needs at least one agent");
        if (is_deterministic_only(kind) && cfg.feedback != FeedbackMode::Deterministic)
            throw std::invalid_argument("deterministic learners require deterministic feedback");
        trace.kind = kind;
        trace.run_index = run;
        trace.config_digest = cfg.config_digest;
        for (int i = 0; i < n; ++i) {
            const AgentProfile& agent = cfg.agents[i];
            entitlements.push_back(agent.entitlement);
            true_unit_demands.push_back(unit_demand(agent.payoff));
            double alpha = agent.payoff.threshold;
            if (agent.policy.kind == ReportPolicy::Kind::ThresholdShift)
                alpha = std::clamp(alpha + agent.policy.param, 1e-6, 1.0 - 1e-6);
            thresholds.push_back(alpha);
        }
        const double cap = cfg.unit_demand_cap;
        for (int i = 0; i < n; ++i) {
            switch (family) {
                case LearnerFamily::Grid:
                    grid.emplace_back(cap, thresholds[i]);
                    break;
                case LearnerFamily::Bisect:
                    bisect.emplace_back(cap, thresholds[i]);
                    break;
                case LearnerFamily::Glm: {
                    GlmSettings s;
                    s.link = cfg.glm_link;
                    s.theta_min = cfg.glm_theta_min;
                    s.kappa = cfg.glm_kappa_per_agent.empty() ? cfg.glm_kappa
                                                              : cfg.glm_kappa_per_agent[i];
                    s.n_agents = n;
                    s.delta = cfg.delta;
                    s.beta_scale = cfg.glm_beta_scale;
                    s.unit_demand_cap = cap;
                    s.threshold = thresholds[i];
                    s.literal_lower_clip = cfg.glm_literal_lower_clip;
                    glm.emplace_back(s);
                    break;
                }
                case LearnerFamily::Tree: {
                    TreeSettings s;
                    s.unit_demand_cap = cap;
                    s.threshold = thresholds[i];
                    s.lipschitz = cfg.tree_lipschitz;
                    s.n_agents = n;
                    s.delta = cfg.delta;
                    s.beta_scale = cfg.tree_beta_scale;
                    tree.emplace_back(s);
                    break;
                }
                case LearnerFamily::None:
                    break;
            }
        }
    }

    RngStream stream(int agent, const char* purpose, std::int64_t t) const {
        return RngStream(derive_seed(cfg.base_seed, run, static_cast<std::uint64_t>(agent),
                                     purpose, static_cast<std::uint64_t>(t)));
    }

    double draw_load(int agent, std::int64_t t) const {
        auto rng = stream(agent, "load", t);
        return sample_load(cfg.load_lo, cfg.load_hi, rng);
    }

    double reported_load(int agent, std::int64_t t, double true_load) const {
        auto rng = stream(agent, "policy_load", t);
        return apply_policy(cfg.agents[agent].policy, true_load, 0.0, rng).load;
    }

    FeedbackSample observe(int agent, std::int64_t t, double alloc, double true_load) const {
        auto rng = stream(agent, "reward", t);
        return sample_reward(cfg.agents[agent].payoff, cfg.feedback, alloc, true_load,
                             cfg.noise_sigma, rng);
    }

    double reported_reward(int agent, std::int64_t t, double true_reward) const {
        auto rng = stream(agent, "policy_reward", t);
        return apply_policy(cfg.agents[agent].policy, 0.0, true_reward, rng).reward;
    }

    // Noise scale as the mechanism sees it; positive even for exact feedback
    // so the precision-weighted learners stay well defined.
    double learner_sigma(double rep_load, double observed_sigma) const {
        if (cfg.feedback == FeedbackMode::Gaussian) return observed_sigma;
        return 1.0 / (2.0 * std::sqrt(rep_load));
    }

    void begin_round(std::int64_t t) {
        for (auto& learner : tree) learner.begin_round(t);
    }

    void record_feedback(int agent, double unit_alloc, double reward, double sigma) {
        const double a = std::clamp(unit_alloc, 0.0, cfg.unit_demand_cap);
        switch (family) {
            case LearnerFamily::Grid: grid[agent].record(a, reward); break;
            case LearnerFamily::Bisect: bisect[agent].record(a, reward); break;
            case LearnerFamily::Glm: glm[agent].record(a, reward, sigma); break;
            case LearnerFamily::Tree: tree[agent].record(a, reward, sigma); break;
            case LearnerFamily::None: break;
        }
    }

    void fill_interval(int agent, AgentRound& row) const {
        switch (family) {
            case LearnerFamily::Grid:
                row.ud_upper = grid[agent].upper();
                break;
            case LearnerFamily::Bisect:
                row.ud_lower = bisect[agent].lower();
                row.ud_upper = bisect[agent].upper();
                break;
            case LearnerFamily::Glm: {
                const GlmInterval iv = glm[agent].interval();
                row.ud_lower = iv.ud_lower;
                row.ud_upper = iv.ud_upper;
                break;
            }
            case LearnerFamily::Tree:
                row.ud_lower = tree[agent].lower_bound_estimate();
                row.ud_upper = tree[agent].upper_bound_estimate();
                break;
            case LearnerFamily::None:
                break;
        }
    }

    RoundRecord make_round(std::int64_t t, std::int64_t bracket, bool explore) const {
        RoundRecord rec;
        rec.t = t;
        rec.bracket = bracket;
        rec.explore = explore;
        rec.agents.resize(n);
        return rec;
    }

    void finish_round(RoundRecord& rec) {
        std::vector<double> demands(n), allocs(n);
        for (int i = 0; i < n; ++i) {
            demands[i] = rec.agents[i].load * true_unit_demands[i];
            allocs[i] = rec.agents[i].alloc;
        }
        rec.loss = loss_components(demands, allocs);
        trace.rounds.push_back(std::move(rec));
    }
};

void run_baseline(Session& s) {
    for (std::int64_t t = 1; t <= s.cfg.horizon; ++t) {
        RoundRecord rec = s.make_round(t, 0, false);
        for (int i = 0; i < s.n; ++i) {
            AgentRound& row = rec.agents[i];
            row.load = s.draw_load(i, t);
            row.reported_load = row.load;
            row.demand = s.entitlements[i];
            row.alloc = s.entitlements[i];
            const FeedbackSample fb = s.observe(i, t, row.alloc, row.load);
            row.reward = fb.reward;
            row.reported_reward = fb.reward;
            row.sigma = fb.sigma;
        }
        s.finish_round(rec);
    }
}

// Bracketed framework: per bracket, a model-specific exploration phase feeds
// the learners, then the frozen upper bounds drive the allocator for
// exploit_rounds(bracket) rounds. Only exploration data reaches the learners.
void run_bracketed(Session& s) {
    const SimulationConfig& cfg = s.cfg;
    std::int64_t t = 1;

    const auto explore_rounds_in_bracket = [&](std::int64_t) -> std::int64_t {
        switch (s.family) {
            case LearnerFamily::Grid: return s.n;
            case LearnerFamily::Bisect: return 2 * s.n;
            case LearnerFamily::Glm: return 1;
            case LearnerFamily::Tree: return s.n;
            default: return 0;
        }
    };
    const auto exploit_rounds = [&](std::int64_t q) -> std::int64_t {
        switch (s.family) {
            case LearnerFamily::Grid: return exploit_rounds_grid(q, s.n);
            case LearnerFamily::Bisect: return exploit_rounds_bisect(q);
            case LearnerFamily::Glm: return exploit_rounds_glm(q);
            case LearnerFamily::Tree: return exploit_rounds_tree(q, s.n);
            default: return 0;
        }
    };

    // One exploration round where `probe_agent` alone is allocated.
    const auto single_agent_probe = [&](std::int64_t round, std::int64_t q, int probe_agent) {
        RoundRecord rec = s.make_round(round, q, true);
        s.begin_round(round);
        for (int i = 0; i < s.n; ++i) {
            AgentRound& row = rec.agents[i];
            row.load = s.draw_load(i, round);
            row.reported_load = s.reported_load(i, round, row.load);
        }
        AgentRound& row = rec.agents[probe_agent];
        double probe = 0.0;
        switch (s.family) {
            case LearnerFamily::Grid: probe = grid_probe(q, cfg.unit_demand_cap); break;
            case LearnerFamily::Bisect: probe = s.bisect[probe_agent].recommend(); break;
            case LearnerFamily::Tree: probe = s.tree[probe_agent].probe_for_upper(); break;
            default: break;
        }
        row.estimate = probe;
        row.demand = probe * row.reported_load;
        // Exploration grants a per-unit-load rate: consumption follows the
        // actual traffic, so probe-round allocations cannot be gamed through
        // the load report.
        row.alloc = probe * row.load;
        const FeedbackSample fb = s.observe(probe_agent, round, row.alloc, row.load);
        row.reward = fb.reward;
        row.reported_reward = s.reported_reward(probe_agent, round, fb.reward);
        row.sigma = s.learner_sigma(row.reported_load, fb.sigma);
        s.record_feedback(probe_agent, probe, row.reported_reward, row.sigma);
        for (int i = 0; i < s.n; ++i) s.fill_interval(i, rec.agents[i]);
        s.finish_round(rec);
    };

    for (std::int64_t q = 1; t <= cfg.horizon; ++q) {
        const std::int64_t explore_len = explore_rounds_in_bracket(q);
        for (std::int64_t j = 0; j < explore_len && t <= cfg.horizon; ++j, ++t) {
            if (s.family == LearnerFamily::Glm) {
                // Single collective round: every agent receives its entitlement.
                RoundRecord rec = s.make_round(t, q, true);
                s.begin_round(t);
                for (int i = 0; i < s.n; ++i) {
                    AgentRound& row = rec.agents[i];
                    row.load = s.draw_load(i, t);
                    row.reported_load = s.reported_load(i, t, row.load);
                    row.demand = s.entitlements[i];
                    row.alloc = s.entitlements[i];
                    const FeedbackSample fb = s.observe(i, t, row.alloc, row.load);
                    row.reward = fb.reward;
                    row.reported_reward = s.reported_reward(i, t, fb.reward);
                    row.sigma = s.learner_sigma(row.reported_load, fb.sigma);
                    row.estimate = row.alloc / row.reported_load;
                    s.record_feedback(i, row.alloc / row.reported_load, row.reported_reward,
                                      row.sigma);
                }
                for (int i = 0; i < s.n; ++i) s.fill_interval(i, rec.agents[i]);
                s.finish_round(rec);
            } else {
                single_agent_probe(t, q, static_cast<int>(j % s.n));
            }
        }
        if (t > cfg.horizon) break;

        // Snapshot the per-agent upper bounds for this bracket's exploit phase.
        std::vector<double> upper(s.n, cfg.unit_demand_cap);
        for (int i = 0; i < s.n; ++i) {
            switch (s.family) {
                case LearnerFamily::Grid: upper[i] = s.grid[i].upper(); break;
                case LearnerFamily::Bisect: upper[i] = s.bisect[i].upper(); break;
                case LearnerFamily::Glm: upper[i] = s.glm[i].upper(); break;
                case LearnerFamily::Tree: upper[i] = s.tree[i].upper(); break;
                default: break;
            }
        }

        const std::int64_t reps = exploit_rounds(q);
        for (std::int64_t r = 0; r < reps && t <= cfg.horizon; ++r, ++t) {
            RoundRecord rec = s.make_round(t, q, false);
            s.begin_round(t);
            AllocationProblem problem;
            problem.entitlements = s.entitlements;
            problem.demands.resize(s.n);
            for (int i = 0; i < s.n; ++i) {
                AgentRound& row = rec.agents[i];
                row.load = s.draw_load(i, t);
                row.reported_load = s.reported_load(i, t, row.load);
                row.estimate = upper[i];
                row.demand = row.reported_load * upper[i];
                problem.demands[i] = row.demand;
            }
            const std::vector<double> alloc = mmf_allocate(problem);
            for (int i = 0; i < s.n; ++i) {
                AgentRound& row = rec.agents[i];
                row.alloc = alloc[i];
                // Exploit-round rewards are observed by the agents but never
                // reach the learners in this framework.
                const FeedbackSample fb = s.observe(i, t, row.alloc, row.load);
                row.reward = fb.reward;
                row.reported_reward = s.reported_reward(i, t, fb.reward);
                row.sigma = s.learner_sigma(row.reported_load, fb.sigma);
                s.fill_interval(i, row);
            }
            s.finish_round(rec);
        }
    }
}

// Round framework: entitlements in round 1, then every round asks each
// learner for a recommendation, allocates via max-min fairness, and records
// everyone's feedback.
void run_round_framework(Session& s) {
    const SimulationConfig& cfg = s.cfg;
    for (std::int64_t t = 1; t <= cfg.horizon; ++t) {
        RoundRecord rec = s.make_round(t, 0, t == 1);
        s.begin_round(t);
        AllocationProblem problem;
        problem.entitlements = s.entitlements;
        problem.demands.resize(s.n);
        for (int i = 0; i < s.n; ++i) {
            AgentRound& row = rec.agents[i];
            row.load = s.draw_load(i, t);
            row.reported_load = s.reported_load(i, t, row.load);
            if (t == 1) {
                row.estimate = 0.0;
                row.demand = s.entitlements[i];
            } else {
                switch (s.family) {
                    case LearnerFamily::Bisect: row.estimate = s.bisect[i].recommend(); break;
                    case LearnerFamily::Glm: row.estimate = s.glm[i].recommend(); break;
                    case LearnerFamily::Tree: row.estimate = s.tree[i].recommend(); break;
                    default: break;
                }
                row.demand = row.reported_load * row.estimate;
            }
            problem.demands[i] = row.demand;
        }
        std::vector<double> alloc;
        if (t == 1)
            alloc = s.entitlements;
        else
            alloc = mmf_allocate(problem);
        for (int i = 0; i < s.n; ++i) {
            AgentRound& row = rec.agents[i];
            row.alloc = alloc[i];
            const FeedbackSample fb = s.observe(i, t, row.alloc, row.load);
            row.reward = fb.reward;
            row.reported_reward = s.reported_reward(i, t, fb.reward);
            row.sigma = s.learner_sigma(row.reported_load, fb.sigma);
            s.record_feedback(i, row.alloc / row.reported_load, row.reported_reward, row.sigma);
            s.fill_interval(i, row);
        }
        s.finish_round(rec);
    }
}

} // namespace

SimulationTrace simulate(const SimulationConfig& config, MechanismKind kind,
                         std::uint64_t run_index) {
    Session session(config, kind, run_index);
    if (kind == MechanismKind::Entitlement)
        run_baseline(session);
    else if (is_bracketed(kind))
        run_bracketed(session);
    else
        run_round_framework(session);
    return std::move(session.trace);
}

double realized_utility(const SimulationTrace& trace, const AgentProfile& profile, int agent) {
    double total = 0.0;
    for (const auto& rec : trace.rounds) {
        const AgentRound& row = rec.agents[agent];
        total += utility_eval(profile, row.alloc / row.load);
    }
    return total;
}

double strategy_gap(const SimulationConfig& config, MechanismKind kind,
                    const ReportPolicy& policy, int target_agent, std::uint64_t run_index) {
    SimulationConfig truthful = config;
    for (auto& agent : truthful.agents) agent.policy = ReportPolicy{};
    SimulationConfig deviating = truthful;
    deviating.agents[target_agent].policy = policy;

    const SimulationTrace honest = simulate(truthful, kind, run_index);
    const SimulationTrace gamed = simulate(deviating, kind, run_index);
    const AgentProfile& profile = truthful.agents[target_agent];
    return realized_utility(gamed, profile, target_agent) -
           realized_utility(honest, profile, target_agent);
}

} // namespace fairshare
