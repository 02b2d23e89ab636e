#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>

namespace fairshare {

// Dyadic probe for exploration bracket q >= 1: walks the odd multiples of
// cap/2^h, one depth at a time (q=1 -> cap/2, q=2 -> cap/4, q=3 -> 3cap/4, ...).
inline double grid_probe(std::int64_t bracket, double cap) {
    const auto q = static_cast<std::uint64_t>(bracket);
    const int h = std::bit_width(q);
    const double k = static_cast<double>(2 * q + 1) - std::ldexp(1.0, h);
    return cap * std::ldexp(k, -h);
}

// Grid-search demand estimator: tracks only an upper bound on the unit
// demand, shrunk whenever a probe met the threshold.
class GridSearchLearner {
public:
    GridSearchLearner(double cap, double threshold)
        : cap_(cap), threshold_(threshold), upper_(cap) {}

    void record(double unit_alloc, double reward) {
        if (reward >= threshold_) upper_ = std::min(upper_, unit_alloc);
    }

    double upper() const { return upper_; }
    double cap() const { return cap_; }

private:
    double cap_;
    double threshold_;
    double upper_;
};

// Bisection demand estimator for exact feedback: keeps [lower, upper] around
// the unit demand and tightens whichever side the observed reward rules out.
class BinarySearchLearner {
public:
    BinarySearchLearner(double cap, double threshold)
        : cap_(cap), threshold_(threshold), lower_(0.0), upper_(cap) {}

    void record(double unit_alloc, double reward) {
        if (reward < threshold_)
            lower_ = std::max(lower_, unit_alloc);
        else
            upper_ = std::min(upper_, unit_alloc);
    }

    double recommend() const { return 0.5 * (lower_ + upper_); }
    double upper() const { return upper_; }
    double lower() const { return lower_; }
    double cap() const { return cap_; }

private:
    double cap_;
    double threshold_;
    double lower_;
    double upper_;
};

// Exploitation-phase lengths per bracket for each framework flavour.
inline std::int64_t exploit_rounds_grid(std::int64_t bracket, int n_agents) {
    return bracket * n_agents;
}

inline std::int64_t exploit_rounds_bisect(std::int64_t bracket) {
    const double v = std::floor(std::exp(static_cast<double>(bracket)));
    return v > 4.0e18 ? static_cast<std::int64_t>(4.0e18) : static_cast<std::int64_t>(v);
}

inline std::int64_t exploit_rounds_glm(std::int64_t bracket) {
    return static_cast<std::int64_t>(std::floor((5.0 / 6.0) * std::sqrt(static_cast<double>(bracket))));
}

inline std::int64_t exploit_rounds_tree(std::int64_t bracket, int n_agents) {
    return static_cast<std::int64_t>(
        std::floor((5.0 / 6.0) * n_agents * std::sqrt(static_cast<double>(bracket))));
}

} // namespace fairshare
