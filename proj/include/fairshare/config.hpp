#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fairshare/mechanism.hpp"

namespace fairshare {

// Declarative description of one experiment, parsed from a flat key=value
// file. Lists are comma-separated; '#' starts a comment.
struct ExperimentConfig {
    std::string name = "experiment";
    int n_agents = 5;
    std::vector<double> entitlements;          // empty = equal shares
    std::int64_t horizon = 2000;
    std::vector<MechanismKind> methods;        // empty = all eight
    FeedbackMode feedback = FeedbackMode::Deterministic;
    PayoffKind payoff = PayoffKind::Tanh;
    std::vector<double> unit_demands;          // empty = log-spaced
    double unit_demand_lo = 1e-6;
    double unit_demand_hi = 1e-4;
    std::vector<double> thresholds;            // empty = 0.9 everywhere
    double unit_demand_cap = 0.0;              // <= 0 = auto (2x the largest)
    double load_lo = 5000.0;
    double load_hi = 15000.0;
    double noise_sigma = 0.005;
    double lipschitz = 0.0;                    // <= 0 = auto from the payoffs
    double glm_theta_min = 0.0;                // <= 0 = auto
    double glm_kappa = 0.0;                    // <= 0 = auto per agent
    double glm_kappa_margin = 2.0;             // auto kappa: slope at margin * inverse(threshold)
    double delta = 1e-3;
    double glm_beta_scale = 0.2;
    double tree_beta_scale = 1.0;
    bool glm_literal_lower_clip = false;
    int runs = 5;
    std::uint64_t seed = 1;
};

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<std::string> errors;  // empty means valid
    bool ok() const { return errors.empty(); }
};

ParsedConfig parse_config_text(const std::string& text);
ParsedConfig parse_config_file(const std::string& path);

// Stable digest of the canonical key=value rendering; stamped into every CSV.
std::string config_digest(const ExperimentConfig& config);
std::string render_config(const ExperimentConfig& config);

// Ground-truth profiles: unit demands (explicit or log-spaced), payoff
// parameters back-solved so each agent's payoff meets its threshold exactly
// at its unit demand. For logistic payoffs the midpoint sits at 0.6x the unit
// demand and the threshold is derived from the curve.
std::vector<AgentProfile> make_profiles(const ExperimentConfig& config);

// Resolves every "auto" knob and bundles profiles + learner settings.
SimulationConfig to_simulation_config(const ExperimentConfig& config);

// All methods this config should run (resolves the empty-methods default).
std::vector<MechanismKind> methods_to_run(const ExperimentConfig& config);

// The feedback mode a given method sees: deterministic-only learners always
// get exact feedback; the configured mode applies to the stochastic ones.
FeedbackMode feedback_for(const ExperimentConfig& config, MechanismKind kind);

} // namespace fairshare
