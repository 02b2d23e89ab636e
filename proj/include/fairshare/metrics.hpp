#pragma once

#include <optional>
#include <span>
#include <vector>

namespace fairshare {

struct AgentProfile;
struct SimulationTrace;

// Per-round efficiency decomposition. The round loss is the amount of
// resource that sat idle or was wasted while some demand went unmet.
struct LossComponents {
    double unallocated = 0.0;    // (1 - sum of allocations)^+
    double overallocated = 0.0;  // sum of (alloc - demand)^+
    double unmet = 0.0;          // sum of (demand - alloc)^+
    double round_loss = 0.0;     // min(unallocated + overallocated, unmet)
};

LossComponents loss_components(std::span<const double> true_demands,
                               std::span<const double> allocations);

// Cumulative utility shortfall vs. sitting on the entitlement, one value per
// agent: sum_t [u_i(e_i / v_it) - u_i(a_it / v_it)].
std::vector<double> fairness_gap(const SimulationTrace& trace,
                                 const std::vector<AgentProfile>& profiles);

// Per-round fairness gap increments for one agent.
std::vector<double> fairness_gap_series(const SimulationTrace& trace,
                                        const AgentProfile& profile, int agent);

// Fraction of (round, agent) samples whose learner interval contains the true
// unit demand; nullopt when the method exposes no intervals.
std::optional<double> coverage_rate(const SimulationTrace& trace,
                                    const std::vector<AgentProfile>& profiles);

} // namespace fairshare
