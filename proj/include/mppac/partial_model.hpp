#pragma once

#include "mppac/graph.hpp"
#include "mppac/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace mppac {

/// How the learner may exploit structural knowledge.
enum class LearnMode {
    Blackbox,             ///< blackbox equations everywhere
    BlackboxGreyUpdates,  ///< greybox equations on blackbox data, surcharge on the inconfidence
    Greybox,              ///< |post(s,a)| known; greybox equations on fully observed pairs
};

struct BoundPair {
    double lower;
    double upper;
};

/// Lower probability estimate for one observed successor.
struct EdgeEstimate {
    NodeId target;
    double lower;
};

/// L^ = sum T^ L(t), U^ = sum T^ U(t) + (1 - sum T^).
BoundPair blackbox_update(std::span<const EdgeEstimate> edges, std::span<const double> L, std::span<const double> U);

/// As blackbox_update, but the residual mass goes to min L / max U over the
/// observed successors. No observed successor gives the vacuous (0, 1).
BoundPair greybox_update(std::span<const EdgeEstimate> edges, std::span<const double> L, std::span<const double> U);

/// Masses of the stay action towards s+, s-, s?.
struct StayDistribution {
    double plus;
    double minus;
    double unknown;
};

/// (l, 1-u, u-l). Throws std::invalid_argument unless 0 <= l <= u <= 1.
StayDistribution stay_distribution(double l, double u);

struct PairStats {
    std::string label;
    std::uint64_t count = 0;
    std::vector<std::pair<NodeId, std::uint64_t>> successors;  ///< (target, #(s,a,t)) in discovery order
    std::uint64_t dwell_count = 0;
    double dwell_sum = 0.0;
    std::size_t post_size = 0;  ///< |post(s,a)| when known (greybox), else 0

    bool complete() const { return post_size > 0 && successors.size() >= post_size; }
    std::uint64_t successor_count(NodeId t) const;
};

/**
 * Everything the learner knows: discovered states (local ids), visit and
 * successor counters, dwell statistics, current bounds and MEC records.
 * Local ids 0, 1, 2 are the pseudo-states s+, s-, s?.
 */
class PartialModel {
public:
    static constexpr NodeId kPlus = 0;
    static constexpr NodeId kMinus = 1;
    static constexpr NodeId kUnknown = 2;
    static constexpr NodeId kFirstState = 3;

    PartialModel();

    static bool is_terminal(NodeId s) { return s < kFirstState; }

    std::size_t node_count() const { return pairs_.size(); }
    std::optional<NodeId> find(StateId global) const;
    StateId global_id(NodeId s) const { return global_[s]; }

    /// Registers a newly seen state. post_sizes may be empty (blackbox).
    NodeId add_state(StateId global, double reward, std::vector<std::string> labels,
                     std::vector<std::size_t> post_sizes = {});

    void record(NodeId s, ActionId a, NodeId t, std::optional<double> dwell = std::nullopt);
    /// Adds `times` observations of t without dwell samples.
    void record_many(NodeId s, ActionId a, NodeId t, std::uint64_t times);
    void add_dwell(NodeId s, ActionId a, double dwell);

    const std::vector<PairStats>& actions(NodeId s) const { return pairs_[s]; }
    const PairStats& pair(NodeId s, ActionId a) const { return pairs_[s][a]; }
    double reward(NodeId s) const { return reward_[s]; }
    double r_max() const { return r_max_; }

    /// Number of discovered (state, action) pairs.
    std::uint64_t pair_count() const { return pair_count_; }

    /// Hoeffding lower estimates of every observed successor of (s,a).
    std::vector<EdgeEstimate> estimates(NodeId s, ActionId a, double delta_tp) const;

    /// One-step bounds of (s,a) from the current L/U under the given mode.
    BoundPair action_bounds(NodeId s, ActionId a, double delta_tp, LearnMode mode) const;

    ActionGraph observed_graph() const;
    CountTable count_table() const;
    /// Per pair: all successors observed and |post| known.
    std::vector<std::vector<char>> complete_table() const;

    std::vector<double> L;
    std::vector<double> U;

    std::vector<MecRecord> mecs;
    std::vector<int> mec_of;  ///< index into mecs, -1 if not in a known MEC

    /// Stay distribution of a record, gains scaled by r_max.
    StayDistribution stay_of(const MecRecord& m) const;
    /// Scaled gain interval (l, u) of a record.
    BoundPair scaled_gain(const MecRecord& m) const;

    /// Replaces the MEC set, carrying over gain bounds from overlapping old
    /// records, and rebuilds mec_of.
    void set_mecs(std::vector<MecRecord> fresh);

    void reset_bounds();

private:
    std::vector<StateId> global_;
    std::unordered_map<StateId, NodeId> local_;
    std::vector<std::vector<PairStats>> pairs_;
    std::vector<double> reward_;
    double r_max_ = 0.0;
    std::uint64_t pair_count_ = 0;
};

}  // namespace mppac
