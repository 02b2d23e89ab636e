#pragma once

#include <string>
#include <vector>

namespace fairshare {

// One allocation instance: n agents sharing a unit resource.
// Entitlements must be positive and sum to 1; demands must be non-negative.
struct AllocationProblem {
    std::vector<double> entitlements;
    std::vector<double> demands;
};

// Throws std::invalid_argument naming the offending field/index.
void validate_problem(const AllocationProblem& problem);

// Max-min fairness. Agents are visited in ascending demand/entitlement order
// (ties broken by agent index). An agent whose demand is below its
// proportional share of the remainder gets the demand exactly; at the first
// agent where that fails, everyone still unserved splits the remainder in
// proportion to their entitlements.
std::vector<double> mmf_allocate(const AllocationProblem& problem);

} // namespace fairshare
