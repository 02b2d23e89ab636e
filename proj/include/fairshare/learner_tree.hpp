#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <utility>

namespace fairshare {

struct TreeSettings {
    double unit_demand_cap = 1.0;
    double threshold = 0.9;
    double lipschitz = 1.0;  // payoff is (lipschitz / cap)-Lipschitz
    int n_agents = 1;
    double delta = 1e-3;
    double beta_scale = 1.0;
};

// Node (height, index): index runs 1..2^height; children of (h, k) are
// (h+1, 2k-1) and (h+1, 2k).
struct TreeNodeId {
    int height = 0;
    std::int64_t index = 1;
    friend bool operator==(const TreeNodeId&, const TreeNodeId&) = default;
};

// Nonparametric demand estimator over a dyadic interval tree. Each node keeps
// precision-weighted reward statistics for its interval plus a monotone
// confidence band [band_lower, band_upper] on the payoff there; the band is
// propagated between siblings and ancestors so it respects the payoff's
// monotonicity.
class TreeLearner {
public:
    struct NodeStats {
        double precision = 0.0;    // sum of 1/sigma^2 assigned here
        double mean_reward = 0.0;  // precision-weighted average
        double local_lower = 0.0;  // per-node band from this node's data alone
        double local_upper = 1.0;
        double band_lower = 0.0;   // monotone band
        double band_upper = 1.0;
        bool expanded = false;
    };

    explicit TreeLearner(const TreeSettings& settings);

    // Must be called when the mechanism enters round t (t >= 1). Recomputes
    // the round-dependent confidence scale and refreshes the whole tree at
    // dyadic epoch boundaries.
    void begin_round(std::int64_t t);

    // Folds (reward, sigma) into every node on the descent path of
    // unit_alloc, then re-propagates the bands along that path.
    void record(double unit_alloc, double reward, double sigma);

    // Round-framework interface: walks toward the child whose band leaves the
    // threshold position most uncertain; returns the midpoint of the stop
    // node's interval.
    double recommend() const;

    // Bracketed-framework interface: walks the upper-bound path, remembers the
    // stop node, and returns its midpoint as the exploration probe.
    double probe_for_upper();

    // Right edge of the remembered upper-bound node.
    double upper() const;

    // Stateless confidence interval on the unit demand: the upper estimate
    // re-runs the upper-bound walk without storing the node; the lower
    // estimate mirrors it (go right only with evidence the demand cannot sit
    // in the left child) and returns the stop node's left edge.
    double upper_bound_estimate() const;
    double lower_bound_estimate() const;

    // Confidence band for the payoff at a given unit allocation.
    std::pair<double, double> band_at(double unit_alloc) const;

    // Diagnostic: walks the in-tree path of nodes containing `a` and counts
    // those whose band excludes the threshold. Returns {excluded, visited}.
    std::pair<int, int> threshold_exclusions(double a) const;

    // Diagnostics.
    void check_invariants() const;  // throws std::logic_error on violation
    void set_trace(std::ostream* sink) { trace_ = sink; }
    std::size_t node_count() const { return nodes_.size(); }
    std::int64_t points_recorded() const { return points_; }
    const TreeSettings& settings() const { return settings_; }

    static std::int64_t epoch_of(std::int64_t t);
    static double beta_value(std::int64_t t, int n_agents, double delta);
    // Interval [lo, hi) covered by a node; right-closed at index == 2^height.
    static std::pair<double, double> node_span(TreeNodeId id, double cap);
    // Data mass required before descending below height h at round t.
    double descend_gate(int height) const;

private:
    using Key = std::pair<int, std::int64_t>;

    static Key key(TreeNodeId id) { return {id.height, id.index}; }
    static TreeNodeId left_child(TreeNodeId id) { return {id.height + 1, 2 * id.index - 1}; }
    static TreeNodeId right_child(TreeNodeId id) { return {id.height + 1, 2 * id.index}; }
    static TreeNodeId parent(TreeNodeId id) { return {id.height - 1, (id.index + 1) / 2}; }

    NodeStats& stats(TreeNodeId id) { return nodes_.at(key(id)); }
    const NodeStats& stats(TreeNodeId id) const { return nodes_.at(key(id)); }
    bool materialized(TreeNodeId id) const { return nodes_.count(key(id)) != 0; }

    void assign_point(TreeNodeId id, double reward, double sigma);
    void refresh_local_band(TreeNodeId id, NodeStats& node) const;
    void expand(TreeNodeId id);
    void update_path_to_root(TreeNodeId stop);
    void repair_same_height(TreeNodeId id);
    std::pair<double, double> bounds_for_unexpanded(TreeNodeId id) const;
    void refresh_tree();
    double threshold_margin(TreeNodeId id) const;
    void trace_line(const char* op, TreeNodeId id) const;

    TreeSettings settings_;
    std::map<Key, NodeStats> nodes_;
    TreeNodeId upper_node_{0, 1};
    std::int64_t round_ = 1;
    std::int64_t points_ = 0;
    int max_expanded_height_ = 0;
    double beta_now_ = 0.0;    // scale used by the descend gate (current round)
    double beta_epoch_ = 0.0;  // scale used by the node bands (current epoch)
    std::ostream* trace_ = nullptr;
};

} // namespace fairshare
