#include "fairshare/learner_glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fairshare {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kThetaHuge = 1e12;  // solver cap when the root runs away
}

double link_eval(LinkKind link, double z) {
    switch (link) {
        case LinkKind::Tanh: return std::tanh(z);
        case LinkKind::Algebraic: return 1.0 - 1.0 / (1.0 + z);
    }
    return 0.0;
}

double link_deriv(LinkKind link, double z) {
    switch (link) {
        case LinkKind::Tanh: {
            const double t = std::tanh(z);
            return 1.0 - t * t;
        }
        case LinkKind::Algebraic: {
            const double d = 1.0 + z;
            return 1.0 / (d * d);
        }
    }
    return 0.0;
}

double link_inverse(LinkKind link, double y) {
    switch (link) {
        case LinkKind::Tanh: return std::atanh(y);
        case LinkKind::Algebraic: return y / (1.0 - y);
    }
    return 0.0;
}

GlmLearner::GlmLearner(const GlmSettings& settings)
    : settings_(settings), cached_upper_(settings.unit_demand_cap) {}

void GlmLearner::record(double unit_alloc, double reward, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("glm learner requires a positive noise scale");
    if (unit_alloc < 0.0 || unit_alloc > settings_.unit_demand_cap * (1.0 + 1e-9))
        throw std::invalid_argument("unit allocation outside [0, cap]");
    data_.push_back({unit_alloc, reward, sigma});
    cached_upper_ = interval().ud_upper;
}

double GlmLearner::theta_estimate() const {
    // Solve g(theta) = sum_s w_s * link(a_s * theta) = sum_s w_s * X_s with
    // w_s = a_s / sigma_s^2; g is non-decreasing in theta.
    double target = 0.0;
    double weight_sum = 0.0;
    double below_supremum = 0.0;  // sum of w_s * (1 - X_s)
    bool has_positive = false;
    for (const auto& p : data_) {
        const double w = p.unit_alloc / (p.sigma * p.sigma);
        target += w * p.reward;
        weight_sum += w;
        below_supremum += w * (1.0 - p.reward);
        if (p.unit_alloc > 0.0) has_positive = true;
    }
    if (!has_positive)
        throw std::runtime_error("glm estimate needs at least one positive allocation");
    // Rewards pinned at the link supremum leave the parameter unidentified
    // from above; report the cap rather than a spurious interior root.
    if (below_supremum <= 1e-12 * weight_sum) return kThetaHuge;

    const auto g = [&](double theta) {
        double acc = 0.0;
        for (const auto& p : data_)
            acc += p.unit_alloc / (p.sigma * p.sigma) * link_eval(settings_.link, p.unit_alloc * theta);
        return acc;
    };
    const auto g_dot = [&](double theta) {
        double acc = 0.0;
        for (const auto& p : data_)
            acc += p.unit_alloc * p.unit_alloc / (p.sigma * p.sigma) *
                   link_deriv(settings_.link, p.unit_alloc * theta);
        return acc;
    };

    const double tol = 1e-10 * std::max(1.0, weight_sum);

    // Bracket the root first; rewards at or above the link's supremum push the
    // solution to infinity, in which case the cap is the answer.
    double lo = 0.0;
    double hi = std::max(settings_.theta_min + 1.0, 1.0);
    if (warm_start_ > 0.0) hi = std::max(hi, warm_start_);
    while (g(hi) < target && hi < kThetaHuge) {
        lo = hi;
        hi *= 4.0;
    }
    if (g(hi) < target) return kThetaHuge;

    double theta = warm_start_ > 0.0 ? warm_start_ : settings_.theta_min + 1.0;
    theta = std::clamp(theta, lo, hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double resid = g(theta) - target;
        if (std::abs(resid) <= tol) {
            warm_start_ = theta;
            return std::max(theta, settings_.theta_min);
        }
        if (resid > 0.0) hi = std::min(hi, theta); else lo = std::max(lo, theta);
        const double slope = g_dot(theta);
        double next = slope > 0.0 ? theta - resid / slope
                                  : std::numeric_limits<double>::quiet_NaN();
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);  // bisection fallback
        theta = next;
    }
    if (std::abs(g(theta) - target) <= 1e4 * tol) {
        warm_start_ = theta;
        return std::max(theta, settings_.theta_min);
    }
    throw std::runtime_error("glm estimate failed to converge");
}

double GlmLearner::weight_norm() const {
    double acc = 0.0;
    for (const auto& p : data_)
        acc += p.unit_alloc * p.unit_alloc / (p.sigma * p.sigma);
    return std::sqrt(acc);
}

double GlmLearner::beta() const {
    const double m = static_cast<double>(data_.size());
    const double arg = settings_.n_agents * kPi * kPi * m * m / (6.0 * settings_.delta);
    return settings_.beta_scale * (5.0 / settings_.kappa) * std::sqrt(std::max(0.0, std::log(arg)));
}

GlmInterval GlmLearner::interval() const {
    GlmInterval out;
    const double cap = settings_.unit_demand_cap;
    const double target_z = link_inverse(settings_.link, settings_.threshold);
    const double norm = weight_norm();
    if (data_.empty() || norm == 0.0) {
        out.theta_hat = settings_.theta_min;
        out.theta_lower = settings_.theta_min;
        out.theta_upper = std::numeric_limits<double>::infinity();
        out.ud_lower = 0.0;
        out.ud_upper = cap;
        return out;
    }
    const double radius = beta() / norm;
    out.theta_hat = theta_estimate();
    out.theta_upper = out.theta_hat + radius;
    out.theta_lower = settings_.literal_lower_clip
                          ? std::min(settings_.theta_min, out.theta_hat - radius)
                          : std::max(settings_.theta_min, out.theta_hat - radius);
    out.ud_upper = out.theta_lower > 0.0 ? std::clamp(target_z / out.theta_lower, 0.0, cap) : cap;
    out.ud_lower = std::clamp(target_z / out.theta_upper, 0.0, out.ud_upper);
    return out;
}

} // namespace fairshare
