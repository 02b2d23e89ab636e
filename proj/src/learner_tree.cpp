#include "fairshare/learner_tree.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace fairshare {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TreeLearner::TreeLearner(const TreeSettings& settings) : settings_(settings) {
    beta_now_ = settings_.beta_scale * beta_value(1, settings_.n_agents, settings_.delta);
    beta_epoch_ = beta_now_;
    nodes_[{0, 1}] = NodeStats{0.0, 0.0, -kInf, kInf, 0.0, 1.0, false};
    expand({0, 1});
}

std::int64_t TreeLearner::epoch_of(std::int64_t t) {
    const auto u = static_cast<std::uint64_t>(t);
    return static_cast<std::int64_t>(std::bit_ceil(u));
}

double TreeLearner::beta_value(std::int64_t t, int n_agents, double delta) {
    const double td = static_cast<double>(t);
    const double arg = n_agents * kPi * kPi * td * td * td / (6.0 * delta);
    return std::sqrt((4.0 + 2.0 * std::log(2.0)) * std::max(0.0, std::log(arg)));
}

std::pair<double, double> TreeLearner::node_span(TreeNodeId id, double cap) {
    const double width = std::ldexp(cap, -id.height);
    return {width * static_cast<double>(id.index - 1), width * static_cast<double>(id.index)};
}

double TreeLearner::descend_gate(int height) const {
    const double l = settings_.lipschitz;
    return beta_now_ * beta_now_ / (l * l) * std::ldexp(1.0, 2 * height);
}

void TreeLearner::begin_round(std::int64_t t) {
    if (t < 1) throw std::invalid_argument("rounds are 1-based");
    round_ = t;
    beta_now_ = settings_.beta_scale * beta_value(t, settings_.n_agents, settings_.delta);
    if (t == epoch_of(t)) {
        beta_epoch_ = beta_now_;
        refresh_tree();
    }
}

void TreeLearner::refresh_local_band(TreeNodeId id, NodeStats& node) const {
    if (node.precision <= 0.0) {
        node.local_lower = -kInf;
        node.local_upper = kInf;
        return;
    }
    const double spread = beta_epoch_ / std::sqrt(node.precision) +
                          settings_.lipschitz * std::ldexp(1.0, -id.height);
    node.local_lower = node.mean_reward - spread;
    node.local_upper = node.mean_reward + spread;
}

void TreeLearner::assign_point(TreeNodeId id, double reward, double sigma) {
    NodeStats& node = stats(id);
    const double w = 1.0 / (sigma * sigma);
    if (node.precision <= 0.0) {
        node.mean_reward = reward;
        node.precision = w;
    } else {
        node.mean_reward = (node.precision * node.mean_reward + reward * w) / (node.precision + w);
        node.precision += w;
    }
    refresh_local_band(id, node);
    trace_line("assign", id);
}

void TreeLearner::record(double unit_alloc, double reward, double sigma) {
    if (!(sigma > 0.0))
        throw std::invalid_argument("tree learner requires a positive noise scale");
    if (unit_alloc < 0.0 || unit_alloc > settings_.unit_demand_cap * (1.0 + 1e-9))
        throw std::invalid_argument("unit allocation outside [0, cap]");
    ++points_;

    TreeNodeId id{0, 1};
    while (true) {
        assign_point(id, reward, sigma);
        if (stats(id).precision < descend_gate(id.height)) break;
        // Enough mass to trust one level deeper; the 4^h growth of the gate
        // caps how far a single observation can push the frontier.
        if (!stats(id).expanded) expand(id);
        const auto [lo, hi] = node_span(id, settings_.unit_demand_cap);
        id = unit_alloc < 0.5 * (lo + hi) ? left_child(id) : right_child(id);
    }
    update_path_to_root(id);
}

void TreeLearner::expand(TreeNodeId id) {
    NodeStats& node = stats(id);
    if (points_ > 0 && node.precision < descend_gate(id.height))
        throw std::logic_error("expansion before the data gate was met");
    // Seed both children from the neighbour bounds of the gap they fill,
    // computed before they join the tree.
    const auto [lo, hi] = bounds_for_unexpanded(left_child(id));
    node.expanded = true;
    max_expanded_height_ = std::max(max_expanded_height_, id.height);
    nodes_[key(left_child(id))] = NodeStats{0.0, 0.0, -kInf, kInf, lo, hi, false};
    nodes_[key(right_child(id))] = NodeStats{0.0, 0.0, -kInf, kInf, lo, hi, false};
    repair_same_height(left_child(id));
    repair_same_height(right_child(id));
    trace_line("expand", id);
}

void TreeLearner::update_path_to_root(TreeNodeId stop) {
    TreeNodeId id = stop;
    if (!stats(id).expanded) {
        NodeStats& node = stats(id);
        const auto [lo, hi] = bounds_for_unexpanded(left_child(id));
        node.band_lower = std::max({node.local_lower, node.band_lower, lo});
        node.band_upper = std::min({node.local_upper, node.band_upper, hi});
        trace_line("band", id);
        repair_same_height(id);
        id = parent(id);
    }
    while (id.height >= 0) {
        NodeStats& node = stats(id);
        node.band_lower = std::max({node.local_lower, node.band_lower,
                                    stats(left_child(id)).band_lower});
        node.band_upper = std::min({node.local_upper, node.band_upper,
                                    stats(right_child(id)).band_upper});
        trace_line("band", id);
        repair_same_height(id);
        if (id.height == 0) break;
        id = parent(id);
    }
}

void TreeLearner::repair_same_height(TreeNodeId id) {
    const NodeStats& ref = stats(id);
    // Push the new lower bound right while neighbours sit below it.
    auto it = nodes_.upper_bound(key(id));
    for (; it != nodes_.end() && it->first.first == id.height; ++it) {
        if (it->second.band_lower >= ref.band_lower) break;
        it->second.band_lower = ref.band_lower;
    }
    // Push the new upper bound left while neighbours sit above it.
    auto rit = std::make_reverse_iterator(nodes_.lower_bound(key(id)));
    for (; rit != nodes_.rend() && rit->first.first == id.height; ++rit) {
        if (rit->second.band_upper <= ref.band_upper) break;
        rit->second.band_upper = ref.band_upper;
    }
}

std::pair<double, double> TreeLearner::bounds_for_unexpanded(TreeNodeId id) const {
    // Rows deeper than the tree's deepest materialized level carry no data.
    if (id.height > max_expanded_height_ + 1) return {0.0, 1.0};
    double lo = 0.0;
    double hi = 1.0;
    // Nearest in-tree neighbours at this height; the payoff is non-decreasing,
    // so a left neighbour's lower bound and a right neighbour's upper bound
    // both apply here.
    const auto rit = std::make_reverse_iterator(nodes_.lower_bound(key(id)));
    if (rit != nodes_.rend() && rit->first.first == id.height) lo = rit->second.band_lower;
    const auto it = nodes_.upper_bound(key(id));
    if (it != nodes_.end() && it->first.first == id.height) hi = it->second.band_upper;
    const auto [clo, chi] = bounds_for_unexpanded(left_child(id));
    return {std::max(lo, clo), std::min(hi, chi)};
}

void TreeLearner::refresh_tree() {
    for (auto& [k, node] : nodes_)
        refresh_local_band({k.first, k.second}, node);
    for (int h = max_expanded_height_; h >= 0; --h) {
        double running_lo = 0.0;
        for (auto it = nodes_.lower_bound({h, 0}); it != nodes_.end() && it->first.first == h; ++it) {
            const TreeNodeId id{h, it->first.second};
            NodeStats& node = it->second;
            double cand;
            if (!node.expanded)
                cand = std::max({node.local_lower, node.band_lower,
                                 bounds_for_unexpanded(left_child(id)).first});
            else
                cand = std::max({node.local_lower, node.band_lower,
                                 stats(left_child(id)).band_lower});
            node.band_lower = std::max(running_lo, cand);
            running_lo = node.band_lower;
        }
        double running_hi = 1.0;
        for (auto rit = std::make_reverse_iterator(nodes_.lower_bound({h + 1, 0}));
             rit != nodes_.rend() && rit->first.first == h; ++rit) {
            const TreeNodeId id{h, rit->first.second};
            NodeStats& node = rit->second;
            double cand;
            if (!node.expanded)
                cand = std::min({node.local_upper, node.band_upper,
                                 bounds_for_unexpanded(left_child(id)).second});
            else
                cand = std::min({node.local_upper, node.band_upper,
                                 stats(right_child(id)).band_upper});
            node.band_upper = std::min(running_hi, cand);
            running_hi = node.band_upper;
        }
    }
    trace_line("refresh", {0, 1});
}

double TreeLearner::threshold_margin(TreeNodeId id) const {
    const NodeStats& node = stats(id);
    return std::min(node.band_upper - settings_.threshold,
                    settings_.threshold - node.band_lower);
}

double TreeLearner::recommend() const {
    TreeNodeId id{0, 1};
    while (true) {
        const NodeStats& node = stats(id);
        if (!node.expanded || node.precision < descend_gate(id.height)) break;
        const double left = threshold_margin(left_child(id));
        const double right = threshold_margin(right_child(id));
        id = left >= right ? left_child(id) : right_child(id);
    }
    const auto [lo, hi] = node_span(id, settings_.unit_demand_cap);
    return 0.5 * (lo + hi);
}

double TreeLearner::probe_for_upper() {
    TreeNodeId id{0, 1};
    while (true) {
        const NodeStats& node = stats(id);
        if (!node.expanded || node.precision < descend_gate(id.height)) break;
        // Go left only with evidence the demand cannot sit in the right child.
        id = stats(right_child(id)).band_lower >= settings_.threshold ? left_child(id)
                                                                      : right_child(id);
    }
    upper_node_ = id;
    const auto [lo, hi] = node_span(id, settings_.unit_demand_cap);
    return 0.5 * (lo + hi);
}

double TreeLearner::upper() const {
    return node_span(upper_node_, settings_.unit_demand_cap).second;
}

double TreeLearner::upper_bound_estimate() const {
    TreeNodeId id{0, 1};
    while (true) {
        const NodeStats& node = stats(id);
        if (!node.expanded || node.precision < descend_gate(id.height)) break;
        id = stats(right_child(id)).band_lower >= settings_.threshold ? left_child(id)
                                                                      : right_child(id);
    }
    return node_span(id, settings_.unit_demand_cap).second;
}

double TreeLearner::lower_bound_estimate() const {
    TreeNodeId id{0, 1};
    while (true) {
        const NodeStats& node = stats(id);
        if (!node.expanded || node.precision < descend_gate(id.height)) break;
        id = stats(left_child(id)).band_upper <= settings_.threshold ? right_child(id)
                                                                     : left_child(id);
    }
    return node_span(id, settings_.unit_demand_cap).first;
}

std::pair<double, double> TreeLearner::band_at(double unit_alloc) const {
    double lo = 0.0;
    double hi = 1.0;
    TreeNodeId id{0, 1};
    while (materialized(id)) {
        const NodeStats& node = stats(id);
        lo = std::max(lo, node.band_lower);
        hi = std::min(hi, node.band_upper);
        const auto [l, r] = node_span(id, settings_.unit_demand_cap);
        id = unit_alloc < 0.5 * (l + r) ? left_child(id) : right_child(id);
    }
    const auto [l, u] = bounds_for_unexpanded(id);
    return {std::max(lo, l), std::min(hi, u)};
}

std::pair<int, int> TreeLearner::threshold_exclusions(double a) const {
    int excluded = 0;
    int visited = 0;
    TreeNodeId id{0, 1};
    while (materialized(id)) {
        const NodeStats& node = stats(id);
        ++visited;
        if (!(node.band_lower < settings_.threshold && settings_.threshold < node.band_upper))
            ++excluded;
        const auto [lo, hi] = node_span(id, settings_.unit_demand_cap);
        id = a < 0.5 * (lo + hi) ? left_child(id) : right_child(id);
    }
    return {excluded, visited};
}

void TreeLearner::check_invariants() const {
    int prev_height = -1;
    double prev_lo = 0.0;
    double prev_hi = 0.0;
    bool first_at_height = true;
    for (const auto& [k, node] : nodes_) {
        const TreeNodeId id{k.first, k.second};
        if (k.first != prev_height) {
            prev_height = k.first;
            first_at_height = true;
        }
        if (!first_at_height) {
            if (node.band_lower < prev_lo - 1e-12)
                throw std::logic_error("band_lower not monotone at height " +
                                       std::to_string(k.first));
            if (node.band_upper < prev_hi - 1e-12)
                throw std::logic_error("band_upper not monotone at height " +
                                       std::to_string(k.first));
        }
        prev_lo = node.band_lower;
        prev_hi = node.band_upper;
        first_at_height = false;
        if (node.expanded) {
            if (!materialized(left_child(id)) || !materialized(right_child(id)))
                throw std::logic_error("expanded node misses a child");
            const double children = stats(left_child(id)).precision +
                                    stats(right_child(id)).precision;
            if (node.precision < children - 1e-9 * std::max(1.0, children))
                throw std::logic_error("precision not nested at parent");
        }
        if (node.precision < 0.0)
            throw std::logic_error("negative precision");
    }
    if (!stats({0, 1}).expanded)
        throw std::logic_error("root must stay expanded");
}

void TreeLearner::trace_line(const char* op, TreeNodeId id) const {
    if (!trace_) return;
    const NodeStats& node = stats(id);
    (*trace_) << op << ' ' << round_ << ' ' << id.height << ' ' << id.index << ' '
              << node.precision << ' ' << node.mean_reward << ' ' << node.band_lower << ' '
              << node.band_upper << '\n';
}

} // namespace fairshare
