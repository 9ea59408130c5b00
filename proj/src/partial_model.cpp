#include "mppac/partial_model.hpp"

#include "mppac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mppac {

BoundPair blackbox_update(std::span<const EdgeEstimate> edges, std::span<const double> L, std::span<const double> U) {
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;
    for (const auto& e : edges) {
        lo += e.lower * L[e.target];
        hi += e.lower * U[e.target];
        mass += e.lower;
    }
    hi += std::max(0.0, 1.0 - mass);
    return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

BoundPair greybox_update(std::span<const EdgeEstimate> edges, std::span<const double> L, std::span<const double> U) {
    if (edges.empty()) return {0.0, 1.0};
    double lo = 0.0;
    double hi = 0.0;
    double mass = 0.0;
    double min_l = std::numeric_limits<double>::infinity();
    double max_u = -std::numeric_limits<double>::infinity();
    for (const auto& e : edges) {
        lo += e.lower * L[e.target];
        hi += e.lower * U[e.target];
        mass += e.lower;
        min_l = std::min(min_l, L[e.target]);
        max_u = std::max(max_u, U[e.target]);
    }
    const double residual = std::max(0.0, 1.0 - mass);
    lo += residual * min_l;
    hi += residual * max_u;
    return {std::clamp(lo, 0.0, 1.0), std::clamp(hi, 0.0, 1.0)};
}

StayDistribution stay_distribution(double l, double u) {
    if (!(l >= 0.0 && l <= u && u <= 1.0)) throw std::invalid_argument("stay bounds need 0 <= l <= u <= 1");
    return {l, 1.0 - u, u - l};
}

std::uint64_t PairStats::successor_count(NodeId t) const {
    for (const auto& [target, n] : successors) {
        if (target == t) return n;
    }
    return 0;
}

PartialModel::PartialModel() {
    // Pseudo-states s+, s-, s?.
    global_.assign(kFirstState, std::numeric_limits<StateId>::max());
    pairs_.resize(kFirstState);
    reward_.assign(kFirstState, 0.0);
    L = {1.0, 0.0, 0.0};
    U = {1.0, 0.0, 1.0};
    mec_of.assign(kFirstState, -1);
}

std::optional<NodeId> PartialModel::find(StateId global) const {
    auto it = local_.find(global);
    if (it == local_.end()) return std::nullopt;
    return it->second;
}

NodeId PartialModel::add_state(StateId global, double reward, std::vector<std::string> labels,
                               std::vector<std::size_t> post_sizes) {
    if (local_.count(global)) throw std::logic_error("state already discovered");
    const auto id = static_cast<NodeId>(pairs_.size());
    local_.emplace(global, id);
    global_.push_back(global);
    std::vector<PairStats> acts(labels.size());
    for (std::size_t a = 0; a < labels.size(); ++a) {
        acts[a].label = std::move(labels[a]);
        if (a < post_sizes.size()) acts[a].post_size = post_sizes[a];
    }
    pair_count_ += acts.size();
    pairs_.push_back(std::move(acts));
    reward_.push_back(reward);
    r_max_ = std::max(r_max_, reward);
    L.push_back(0.0);
    U.push_back(1.0);
    mec_of.push_back(-1);
    return id;
}

void PartialModel::record(NodeId s, ActionId a, NodeId t, std::optional<double> dwell) {
    record_many(s, a, t, 1);
    if (dwell) add_dwell(s, a, *dwell);
}

void PartialModel::record_many(NodeId s, ActionId a, NodeId t, std::uint64_t times) {
    if (times == 0) return;
    auto& p = pairs_[s][a];
    p.count += times;
    auto it = std::find_if(p.successors.begin(), p.successors.end(), [t](const auto& e) { return e.first == t; });
    if (it == p.successors.end()) p.successors.emplace_back(t, times);
    else it->second += times;
}

void PartialModel::add_dwell(NodeId s, ActionId a, double dwell) {
    auto& p = pairs_[s][a];
    ++p.dwell_count;
    p.dwell_sum += dwell;
}

std::vector<EdgeEstimate> PartialModel::estimates(NodeId s, ActionId a, double delta_tp) const {
    const auto& p = pairs_[s][a];
    std::vector<EdgeEstimate> out;
    if (p.count == 0) return out;
    const double width = stats::tp_width(p.count, delta_tp);
    out.reserve(p.successors.size());
    for (const auto& [t, n] : p.successors) out.push_back({t, stats::lower_tp_estimate(n, p.count, width)});
    return out;
}

BoundPair PartialModel::action_bounds(NodeId s, ActionId a, double delta_tp, LearnMode mode) const {
    const auto& p = pairs_[s][a];
    if (p.count == 0) return {0.0, 1.0};
    const auto est = estimates(s, a, delta_tp);
    const bool grey = mode == LearnMode::BlackboxGreyUpdates || (mode == LearnMode::Greybox && p.complete());
    return grey ? greybox_update(est, L, U) : blackbox_update(est, L, U);
}

ActionGraph PartialModel::observed_graph() const {
    ActionGraph g;
    g.succ.resize(pairs_.size());
    for (NodeId s = 0; s < pairs_.size(); ++s) {
        for (const auto& p : pairs_[s]) {
            std::vector<NodeId> out;
            out.reserve(p.successors.size());
            for (const auto& e : p.successors) out.push_back(e.first);
            std::sort(out.begin(), out.end());
            g.succ[s].push_back(std::move(out));
        }
    }
    return g;
}

CountTable PartialModel::count_table() const {
    CountTable c(pairs_.size());
    for (NodeId s = 0; s < pairs_.size(); ++s) {
        for (const auto& p : pairs_[s]) c[s].push_back(p.count);
    }
    return c;
}

std::vector<std::vector<char>> PartialModel::complete_table() const {
    std::vector<std::vector<char>> c(pairs_.size());
    for (NodeId s = 0; s < pairs_.size(); ++s) {
        for (const auto& p : pairs_[s]) c[s].push_back(p.complete() ? 1 : 0);
    }
    return c;
}

BoundPair PartialModel::scaled_gain(const MecRecord& m) const {
    if (r_max_ <= 0.0) {
        // Every reward seen so far is 0; only an unrefined record stays vacuous.
        return {0.0, std::isfinite(m.gain_upper) ? 0.0 : 1.0};
    }
    const double l = std::clamp(m.gain_lower / r_max_, 0.0, 1.0);
    const double u = std::clamp(m.gain_upper / r_max_, 0.0, 1.0);
    return {std::min(l, u), u};
}

StayDistribution PartialModel::stay_of(const MecRecord& m) const {
    const auto g = scaled_gain(m);
    return stay_distribution(g.lower, g.upper);
}

void PartialModel::set_mecs(std::vector<MecRecord> fresh) {
    for (auto& n : fresh) {
        for (const auto& o : mecs) {
            if (o.subset_of(n)) {
                n.gain_lower = std::max(n.gain_lower, o.gain_lower);
            }
            if (n.subset_of(o)) {
                n.gain_upper = std::min(n.gain_upper, o.gain_upper);
                n.sample_budget = std::max(n.sample_budget, o.sample_budget);
            }
        }
        if (n.gain_lower > n.gain_upper) n.gain_lower = n.gain_upper;
    }
    mecs = std::move(fresh);
    std::fill(mec_of.begin(), mec_of.end(), -1);
    for (std::size_t i = 0; i < mecs.size(); ++i) {
        for (NodeId s : mecs[i].states) mec_of[s] = static_cast<int>(i);
    }
}

void PartialModel::reset_bounds() {
    for (NodeId s = kFirstState; s < L.size(); ++s) {
        L[s] = 0.0;
        U[s] = 1.0;
    }
}

}  // namespace mppac
