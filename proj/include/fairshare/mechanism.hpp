#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairshare/learner_glm.hpp"
#include "fairshare/learner_tree.hpp"
#include "fairshare/metrics.hpp"
#include "fairshare/payoff.hpp"

namespace fairshare {

enum class MechanismKind {
    Entitlement,   // static: allocate entitlements every round
    DetSpGrid,     // bracketed framework + grid search, deterministic feedback
    DetSpBisect,   // bracketed framework + binary search, deterministic feedback
    DetNspBisect,  // round framework + binary search, deterministic feedback
    GlmSp,         // bracketed framework + parametric estimator
    GlmNsp,        // round framework + parametric estimator
    TreeSp,        // bracketed framework + tree estimator
    TreeNsp,       // round framework + tree estimator
};

const char* to_string(MechanismKind kind);
std::optional<MechanismKind> mechanism_from_string(const std::string& name);
bool is_bracketed(MechanismKind kind);
bool is_deterministic_only(MechanismKind kind);

struct AgentRound {
    double load = 0.0;           // true load
    double reported_load = 0.0;  // after the agent's policy
    double demand = 0.0;         // demand handed to the allocator
    double alloc = 0.0;
    double reward = 0.0;          // true observed reward
    double reported_reward = 0.0; // after the agent's policy
    double sigma = 0.0;
    double estimate = 0.0;  // unit-demand estimate driving this round
    std::optional<double> ud_lower;
    std::optional<double> ud_upper;
};

struct RoundRecord {
    std::int64_t t = 0;
    std::int64_t bracket = 0;  // 0 for round-framework methods
    bool explore = false;
    std::vector<AgentRound> agents;
    LossComponents loss;
};

struct SimulationTrace {
    std::string config_digest;
    MechanismKind kind = MechanismKind::Entitlement;
    std::uint64_t run_index = 0;
    std::vector<RoundRecord> rounds;
};

// Everything one simulation needs. Learner settings are derived from the
// experiment config; profiles carry the ground truth.
struct SimulationConfig {
    std::vector<AgentProfile> agents;
    std::int64_t horizon = 1000;
    FeedbackMode feedback = FeedbackMode::Deterministic;
    double load_lo = 5000.0;
    double load_hi = 15000.0;
    double noise_sigma = 0.005;        // gaussian feedback only
    double unit_demand_cap = 1.0;
    double delta = 1e-3;
    LinkKind glm_link = LinkKind::Tanh;
    double glm_theta_min = 1e-3;
    double glm_kappa = 1.0;            // per-agent override below wins if set
    std::vector<double> glm_kappa_per_agent;
    double glm_beta_scale = 0.2;
    bool glm_literal_lower_clip = false;
    double tree_lipschitz = 1.0;
    double tree_beta_scale = 1.0;
    std::uint64_t base_seed = 1;
    std::string config_digest;
};

// Runs one seeded simulation of the given mechanism. run_index selects the
// environment streams; identical (config, run_index) reproduce the trace
// bit for bit.
SimulationTrace simulate(const SimulationConfig& config, MechanismKind kind,
                         std::uint64_t run_index);

// Utility an agent accrued over a trace, evaluated with its true profile.
double realized_utility(const SimulationTrace& trace, const AgentProfile& profile, int agent);

// Runs paired truthful / policy simulations sharing every environment stream
// and returns U^policy - U^truthful for the targeted agent.
double strategy_gap(const SimulationConfig& config, MechanismKind kind,
                    const ReportPolicy& policy, int target_agent,
                    std::uint64_t run_index);

} // namespace fairshare
