#include <doctest.h>

#include <stdexcept>

#include <cmath>

#include "fairshare/payoff.hpp"
#include "fairshare/rng.hpp"

using namespace fairshare;

TEST_CASE("payoff curves hit their closed forms") {
    PayoffSpec tanh_spec{PayoffKind::Tanh, 1.0, 0.0, 0.9, 1.0, 1.0};
    CHECK(payoff_eval(tanh_spec, 0.0) == doctest::Approx(0.0));

    PayoffSpec alg{PayoffKind::Algebraic, 1.0, 0.0, 0.9, 2.0, 1.0};
    CHECK(payoff_eval(alg, 1.0) == doctest::Approx(0.5));

    PayoffSpec log_spec{PayoffKind::Logistic, 0.0, 0.6, 0.5, 2.0, 1.0};
    CHECK(payoff_eval(log_spec, 0.6) == doctest::Approx(0.5));
}

TEST_CASE("unit demand inverts the payoff") {
    PayoffSpec tanh_spec{PayoffKind::Tanh, 2.0, 0.0, std::tanh(1.0), 1.0, 1.0};
    CHECK(unit_demand(tanh_spec) == doctest::Approx(0.5));

    PayoffSpec alg{PayoffKind::Algebraic, 1.0, 0.0, 0.5, 2.0, 1.0};
    CHECK(unit_demand(alg) == doctest::Approx(1.0));

    PayoffSpec log_spec{PayoffKind::Logistic, 0.0, 3.0, 0.5, 4.0, 1.0};
    CHECK(unit_demand(log_spec) == doctest::Approx(3.0));
}

TEST_CASE("unit demand rejects unreachable thresholds") {
    // Logistic with f(0) above the requested threshold has no positive root.
    PayoffSpec log_spec{PayoffKind::Logistic, 0.0, -5.0, 0.5, 1.0, 1.0};
    CHECK_THROWS_AS(unit_demand(log_spec), std::domain_error);
    // Threshold beyond the cap.
    PayoffSpec slow{PayoffKind::Tanh, 0.1, 0.0, 0.9, 1.0, 1.0};
    CHECK_THROWS_AS(unit_demand(slow), std::domain_error);
}

TEST_CASE("payoff is non-decreasing and Lipschitz on a grid") {
    for (PayoffKind kind : {PayoffKind::Tanh, PayoffKind::Algebraic, PayoffKind::Logistic}) {
        PayoffSpec spec;
        spec.kind = kind;
        spec.theta = 3.0;
        spec.offset = 0.4;
        spec.threshold = 0.6;
        spec.unit_demand_cap = 1.0;
        spec.lipschitz = payoff_lipschitz_scale(spec);
        double prev = payoff_eval(spec, 0.0);
        const int grid = 1000;
        for (int i = 1; i <= grid; ++i) {
            const double x = spec.unit_demand_cap * i / grid;
            const double y = payoff_eval(spec, x);
            CHECK(y >= prev - 1e-12);
            const double step = spec.unit_demand_cap / grid;
            CHECK(std::abs(y - prev) <=
                  spec.lipschitz / spec.unit_demand_cap * step + 1e-12);
            prev = y;
        }
        const double w = unit_demand(spec);
        CHECK(payoff_eval(spec, w) == doctest::Approx(spec.threshold).epsilon(1e-10));
    }
}

TEST_CASE("utility follows the payoff then flattens") {
    AgentProfile agent;
    agent.entitlement = 0.5;
    agent.payoff = {PayoffKind::Tanh, 1.0, 0.0, 0.9, 5.0, 5.0};
    const double w = unit_demand(agent.payoff);
    CHECK(utility_eval(agent, 0.0) == doctest::Approx(0.0));
    CHECK(utility_eval(agent, w / 2) == doctest::Approx(payoff_eval(agent.payoff, w / 2)));
    CHECK(utility_eval(agent, w / 2) < agent.payoff.threshold);
    CHECK(utility_eval(agent, agent.payoff.unit_demand_cap) ==
          doctest::Approx(agent.payoff.threshold));
    CHECK(utility_eval(agent, w) == doctest::Approx(utility_eval(agent, 2 * w)).epsilon(1e-9));
}

TEST_CASE("stream derivation is sensitive to every label") {
    const auto base = derive_seed(9, 0, 1, "load", 7);
    CHECK(base == derive_seed(9, 0, 1, "load", 7));
    CHECK(base != derive_seed(10, 0, 1, "load", 7));
    CHECK(base != derive_seed(9, 1, 1, "load", 7));
    CHECK(base != derive_seed(9, 0, 2, "load", 7));
    CHECK(base != derive_seed(9, 0, 1, "reward", 7));
    CHECK(base != derive_seed(9, 0, 1, "load", 8));
}

TEST_CASE("load sampling is deterministic and in range") {
    RngStream a(derive_seed(9, 0, 1, "load", 7));
    RngStream b(derive_seed(9, 0, 1, "load", 7));
    CHECK(sample_load(5000, 15000, a) == sample_load(5000, 15000, b));
    RngStream c(11);
    CHECK(sample_load(5000, 5000, c) == 5000);
    for (int i = 0; i < 100; ++i) {
        const double v = sample_load(5000, 15000, c);
        CHECK(v >= 5000);
        CHECK(v <= 15000);
    }
    CHECK_THROWS_AS(sample_load(10, 5, c), std::invalid_argument);
}

TEST_CASE("reward sampling per feedback mode") {
    PayoffSpec spec{PayoffKind::Tanh, 2.0, 0.0, 0.9, 1.0, 2.0};
    RngStream rng(3);

    const auto det = sample_reward(spec, FeedbackMode::Deterministic, 0.3, 2.0, 0.0, rng);
    CHECK(det.reward == doctest::Approx(payoff_eval(spec, 0.15)));
    CHECK(det.sigma == 0.0);

    const auto sat = sample_reward({PayoffKind::Logistic, 0.0, -40.0, 0.5, 1.0, 1.0},
                                   FeedbackMode::BernoulliAggregate, 0.9, 50.0, 0.0, rng);
    CHECK(sat.reward == doctest::Approx(1.0));  // success probability is 1

    const auto agg = sample_reward(spec, FeedbackMode::BernoulliAggregate, 0.2, 10000.0, 0.0, rng);
    CHECK(agg.sigma == doctest::Approx(0.005));
    CHECK(agg.reward >= 0.0);
    CHECK(agg.reward <= 1.0);

    const auto gs = sample_reward(spec, FeedbackMode::Gaussian, 0.2, 100.0, 0.05, rng);
    CHECK(gs.sigma == doctest::Approx(0.05));
    CHECK(gs.reward >= 0.0);
    CHECK(gs.reward <= 1.0);
}

TEST_CASE("aggregate feedback concentrates on the payoff") {
    PayoffSpec spec{PayoffKind::Tanh, 2.0, 0.0, 0.9, 1.0, 2.0};
    RngStream rng(99);
    const double alloc = 120.0, load = 400.0;
    const double mean = payoff_eval(spec, alloc / load);
    double acc = 0.0;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i)
        acc += sample_reward(spec, FeedbackMode::BernoulliAggregate, alloc, load, 0.0, rng).reward;
    acc /= draws;
    const double sigma = 1.0 / (2.0 * std::sqrt(load)) / std::sqrt(static_cast<double>(draws));
    CHECK(std::abs(acc - mean) <= 3.0 * sigma);
}

TEST_CASE("report policies transform loads and rewards") {
    RngStream rng(5);
    ReportPolicy truthful;
    const auto id = apply_policy(truthful, 5000.0, 0.9, rng);
    CHECK(id.load == 5000.0);
    CHECK(id.reward == 0.9);

    ReportPolicy scale{ReportPolicy::Kind::LoadScale, 2.0};
    CHECK(apply_policy(scale, 5000.0, 0.9, rng).load == doctest::Approx(10000.0));
    CHECK(apply_policy(scale, 5000.0, 0.9, rng).reward == doctest::Approx(0.9));

    ReportPolicy shift{ReportPolicy::Kind::RewardShift, 0.95};
    CHECK(apply_policy(shift, 5000.0, 0.9, rng).reward == doctest::Approx(0.0));

    ReportPolicy random{ReportPolicy::Kind::RandomMisreport, 1.0};
    for (int i = 0; i < 50; ++i) {
        const auto rep = apply_policy(random, 5000.0, 0.9, rng);
        CHECK(rep.load > 0.0);
        CHECK(rep.reward >= 0.0);
        CHECK(rep.reward <= 1.0);
    }
}
