#pragma once

#include <cstdint>

#include "fairshare/rng.hpp"

namespace fairshare {

enum class PayoffKind { Tanh, Algebraic, Logistic };

// Ground-truth payoff curve for one agent: a non-decreasing map from
// resource-per-unit-load to expected reward in [0, 1].
//   Tanh:       f(x) = tanh(theta * x)
//   Algebraic:  f(x) = 1 - 1/(1 + theta * x)
//   Logistic:   f(x) = 1/(1 + exp(-(x - offset)))
struct PayoffSpec {
    PayoffKind kind = PayoffKind::Tanh;
    double theta = 1.0;            // rate parameter (tanh/algebraic)
    double offset = 0.0;           // midpoint (logistic)
    double threshold = 0.9;        // target payoff, in (0, 1)
    double unit_demand_cap = 1.0;  // known upper bound on the unit demand
    double lipschitz = 1.0;        // f is (lipschitz / unit_demand_cap)-Lipschitz
};

// f(x) for x >= 0.
double payoff_eval(const PayoffSpec& spec, double x);

// Closed-form f^{-1}(threshold). Throws std::domain_error when the threshold
// is unreachable on (0, unit_demand_cap].
double unit_demand(const PayoffSpec& spec);

// Tightest Lipschitz scale for the spec: smallest L with
// |f(x)-f(y)| <= L/cap * |x-y| on [0, cap].
double payoff_lipschitz_scale(const PayoffSpec& spec);

struct ReportPolicy {
    enum class Kind { Truthful, LoadScale, RewardShift, ThresholdShift, RandomMisreport };
    Kind kind = Kind::Truthful;
    double param = 0.0;
};

struct AgentProfile {
    double entitlement = 0.0;
    PayoffSpec payoff;
    double utility_lipschitz = 1.0;  // Lipschitz constant of the utility in x
    ReportPolicy policy;
};

// Utility is the payoff capped at the threshold: increasing up to the unit
// demand, flat beyond it.
double utility_eval(const AgentProfile& profile, double x);

enum class FeedbackMode { Deterministic, BernoulliAggregate, Gaussian };

struct FeedbackSample {
    double reward = 0.0;  // in [0, 1]
    double sigma = 0.0;   // sub-Gaussian scale of the reward noise; 0 = exact
};

double sample_load(double lo, double hi, RngStream& rng);

// Deterministic: X = f(a/v), sigma 0.
// BernoulliAggregate: X = Binomial(floor(v), f(a/v)) / floor(v), sigma 1/(2 sqrt(v)).
// Gaussian: X = clip(f(a/v) + N(0, noise_sigma^2), 0, 1), sigma noise_sigma.
FeedbackSample sample_reward(const PayoffSpec& spec, FeedbackMode mode, double alloc,
                             double load, double noise_sigma, RngStream& rng);

struct Reported {
    double load = 0.0;
    double reward = 0.0;
};

// Transforms an agent's true (load, reward) into what it tells the mechanism.
// ThresholdShift does not act here (it perturbs the reported threshold once,
// at setup). RandomMisreport rescales the load by U[0.5, 2] and shifts the
// reward by U[-0.1, 0.1] with probability param.
Reported apply_policy(const ReportPolicy& policy, double true_load, double true_reward,
                      RngStream& rng);

} // namespace fairshare
