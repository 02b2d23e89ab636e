#include "fairshare/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairshare/mechanism.hpp"
#include "fairshare/payoff.hpp"

namespace fairshare {

LossComponents loss_components(std::span<const double> true_demands,
                               std::span<const double> allocations) {
    if (true_demands.size() != allocations.size())
        throw std::invalid_argument("demands and allocations differ in length");
    LossComponents out;
    double total = 0.0;
    for (std::size_t i = 0; i < allocations.size(); ++i) {
        total += allocations[i];
        out.overallocated += std::max(0.0, allocations[i] - true_demands[i]);
        out.unmet += std::max(0.0, true_demands[i] - allocations[i]);
    }
    out.unallocated = std::max(0.0, 1.0 - total);
    out.round_loss = std::min(out.unallocated + out.overallocated, out.unmet);
    return out;
}

std::vector<double> fairness_gap_series(const SimulationTrace& trace,
                                        const AgentProfile& profile, int agent) {
    std::vector<double> increments;
    increments.reserve(trace.rounds.size());
    for (const auto& rec : trace.rounds) {
        const AgentRound& row = rec.agents[agent];
        increments.push_back(utility_eval(profile, profile.entitlement / row.load) -
                             utility_eval(profile, row.alloc / row.load));
    }
    return increments;
}

std::vector<double> fairness_gap(const SimulationTrace& trace,
                                 const std::vector<AgentProfile>& profiles) {
    std::vector<double> gaps(profiles.size(), 0.0);
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        for (double inc : fairness_gap_series(trace, profiles[i], static_cast<int>(i)))
            gaps[i] += inc;
    }
    return gaps;
}

std::optional<double> coverage_rate(const SimulationTrace& trace,
                                    const std::vector<AgentProfile>& profiles) {
    std::int64_t covered = 0;
    std::int64_t total = 0;
    for (const auto& rec : trace.rounds) {
        for (std::size_t i = 0; i < profiles.size(); ++i) {
            const AgentRound& row = rec.agents[i];
            if (!row.ud_lower || !row.ud_upper) continue;
            const double w = unit_demand(profiles[i].payoff);
            // Absorb round-off once deterministic intervals shrink to machine
            // width; statistical misses are orders of magnitude larger.
            const double slack = 1e-9 * std::max(1.0, std::abs(w));
            ++total;
            if (*row.ud_lower - slack <= w && w <= *row.ud_upper + slack) ++covered;
        }
    }
    if (total == 0) return std::nullopt;
    return static_cast<double>(covered) / static_cast<double>(total);
}

} // namespace fairshare
