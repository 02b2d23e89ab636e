#include "fairshare/mmf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fairshare {

void validate_problem(const AllocationProblem& problem) {
    const auto& e = problem.entitlements;
    const auto& d = problem.demands;
    if (e.size() != d.size())
        throw std::invalid_argument("entitlements and demands differ in length");
    if (e.empty())
        throw std::invalid_argument("empty allocation problem");
    double sum = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        if (!(e[i] > 0.0))
            throw std::invalid_argument("entitlement " + std::to_string(i) + " must be > 0");
        sum += e[i];
    }
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("entitlements sum to " + std::to_string(sum) + ", expected 1");
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (!(d[i] >= 0.0))
            throw std::invalid_argument("demand " + std::to_string(i) + " must be >= 0");
    }
}

std::vector<double> mmf_allocate(const AllocationProblem& problem) {
    validate_problem(problem);
    const auto& ent = problem.entitlements;
    const auto& dem = problem.demands;
    const std::size_t n = ent.size();

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dem[a] / ent[a] < dem[b] / ent[b];
    });

    std::vector<double> alloc(n, 0.0);
    double remaining = 1.0;
    double ent_left = 1.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t j = order[pos];
        if (dem[j] < remaining * ent[j] / ent_left) {
            alloc[j] = dem[j];
            remaining -= dem[j];
            ent_left -= ent[j];
        } else {
            // Saturated: split the remainder proportionally and stop.
            for (std::size_t p = pos; p < n; ++p) {
                const std::size_t k = order[p];
                alloc[k] = remaining * ent[k] / ent_left;
            }
            break;
        }
    }
    return alloc;
}

} // namespace fairshare
