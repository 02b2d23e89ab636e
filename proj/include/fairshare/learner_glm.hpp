#pragma once

#include <cstddef>
#include <vector>

namespace fairshare {

enum class LinkKind { Tanh, Algebraic };

double link_eval(LinkKind link, double z);
double link_deriv(LinkKind link, double z);
double link_inverse(LinkKind link, double y);

struct GlmSettings {
    LinkKind link = LinkKind::Tanh;
    double theta_min = 1e-3;   // known lower bound on the rate parameter
    double kappa = 1.0;        // known infimum of the link derivative in use
    int n_agents = 1;
    double delta = 1e-3;
    double beta_scale = 0.2;   // multiplier on the theoretical radius
    double unit_demand_cap = 1.0;
    double threshold = 0.9;
    // Keep the printed lower-clip (min with theta_min) instead of the
    // corrected max; only useful for side-by-side comparison.
    bool literal_lower_clip = false;
};

struct GlmInterval {
    double theta_hat = 0.0;
    double theta_lower = 0.0;
    double theta_upper = 0.0;
    double ud_lower = 0.0;
    double ud_upper = 0.0;
};

// Quasi-likelihood estimator for payoffs of the form link(theta * x).
// Estimates theta from (unit allocation, reward, noise scale) triples and
// converts the confidence interval on theta into one on the unit demand.
class GlmLearner {
public:
    explicit GlmLearner(const GlmSettings& settings);

    // sigma must be > 0; rejects degenerate points.
    void record(double unit_alloc, double reward, double sigma);

    // Maximum quasi-likelihood estimate clipped below at theta_min. Newton
    // iteration with a bisection fallback; throws std::runtime_error when no
    // positive-allocation data exists or the solver fails to converge.
    double theta_estimate() const;

    // sqrt(sum a^2 / sigma^2) over recorded points.
    double weight_norm() const;

    // beta_scale * (5/kappa) * sqrt(log(n pi^2 |D|^2 / (6 delta))).
    double beta() const;

    GlmInterval interval() const;

    double upper() const { return cached_upper_; }
    double recommend() const { return cached_upper_; }
    std::size_t size() const { return data_.size(); }
    const GlmSettings& settings() const { return settings_; }

private:
    struct Point {
        double unit_alloc;
        double reward;
        double sigma;
    };

    GlmSettings settings_;
    std::vector<Point> data_;
    double cached_upper_;
    mutable double warm_start_ = -1.0;  // last solved root, seeds the next solve
};

} // namespace fairshare
