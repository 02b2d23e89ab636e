#include "fairshare/payoff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fairshare {

double payoff_eval(const PayoffSpec& spec, double x) {
    switch (spec.kind) {
        case PayoffKind::Tanh:
            return std::tanh(spec.theta * x);
        case PayoffKind::Algebraic:
            return 1.0 - 1.0 / (1.0 + spec.theta * x);
        case PayoffKind::Logistic:
            return 1.0 / (1.0 + std::exp(-(x - spec.offset)));
    }
    return 0.0;
}

double unit_demand(const PayoffSpec& spec) {
    const double a = spec.threshold;
    if (!(a > 0.0 && a < 1.0))
        throw std::domain_error("threshold must lie in (0, 1)");
    double w = 0.0;
    switch (spec.kind) {
        case PayoffKind::Tanh:
            w = std::atanh(a) / spec.theta;
            break;
        case PayoffKind::Algebraic:
            w = a / (1.0 - a) / spec.theta;
            break;
        case PayoffKind::Logistic:
            w = spec.offset + std::log(a / (1.0 - a));
            break;
    }
    if (!(w > 0.0) || w > spec.unit_demand_cap * (1.0 + 1e-12))
        throw std::domain_error("threshold unreachable on (0, unit_demand_cap]");
    return w;
}

double payoff_lipschitz_scale(const PayoffSpec& spec) {
    // All three families have their steepest slope at a known point:
    // tanh/algebraic at 0 (slope theta), logistic at its midpoint (slope 1/4).
    switch (spec.kind) {
        case PayoffKind::Tanh:
        case PayoffKind::Algebraic:
            return spec.theta * spec.unit_demand_cap;
        case PayoffKind::Logistic:
            return 0.25 * spec.unit_demand_cap;
    }
    return 1.0;
}

double utility_eval(const AgentProfile& profile, double x) {
    return std::min(payoff_eval(profile.payoff, x), profile.payoff.threshold);
}

double sample_load(double lo, double hi, RngStream& rng) {
    if (!(lo > 0.0) || lo > hi)
        throw std::invalid_argument("load range requires 0 < lo <= hi");
    if (lo == hi) return lo;
    return rng.uniform(lo, hi);
}

FeedbackSample sample_reward(const PayoffSpec& spec, FeedbackMode mode, double alloc,
                             double load, double noise_sigma, RngStream& rng) {
    const double mean = payoff_eval(spec, alloc / load);
    switch (mode) {
        case FeedbackMode::Deterministic:
            return {mean, 0.0};
        case FeedbackMode::BernoulliAggregate: {
            const auto trials = static_cast<std::uint64_t>(std::floor(load));
            const double p = std::clamp(mean, 0.0, 1.0);
            const double x = static_cast<double>(rng.binomial(trials, p)) / static_cast<double>(trials);
            return {x, 1.0 / (2.0 * std::sqrt(load))};
        }
        case FeedbackMode::Gaussian: {
            const double x = std::clamp(mean + noise_sigma * rng.normal(), 0.0, 1.0);
            return {x, noise_sigma};
        }
    }
    return {mean, 0.0};
}

Reported apply_policy(const ReportPolicy& policy, double true_load, double true_reward,
                      RngStream& rng) {
    switch (policy.kind) {
        case ReportPolicy::Kind::Truthful:
        case ReportPolicy::Kind::ThresholdShift:
            return {true_load, true_reward};
        case ReportPolicy::Kind::LoadScale:
            return {true_load * policy.param, true_reward};
        case ReportPolicy::Kind::RewardShift:
            return {true_load, std::clamp(true_reward - policy.param, 0.0, 1.0)};
        case ReportPolicy::Kind::RandomMisreport: {
            const bool act = rng.next_unit() < policy.param;
            const double scale = rng.uniform(0.5, 2.0);
            const double shift = rng.uniform(-0.1, 0.1);
            if (!act) return {true_load, true_reward};
            return {true_load * scale, std::clamp(true_reward + shift, 0.0, 1.0)};
        }
    }
    return {true_load, true_reward};
}

} // namespace fairshare
