#pragma once

#include "mppac/model.hpp"

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace mppac {

/// Index of a state inside a graph view (dense, 0-based).
using NodeId = std::uint32_t;

/// Pseudo action id for the synthetic stay action.
inline constexpr ActionId kStayAction = std::numeric_limits<ActionId>::max();

/**
 * Adjacency view (state, action) -> successor set. Optional masks restrict
 * the view to a subset of states and actions without copying it.
 */
struct ActionGraph {
    std::vector<std::vector<std::vector<NodeId>>> succ;  ///< succ[s][a]
    std::vector<std::vector<char>> action_enabled;         ///< empty = all enabled
    std::vector<char> state_enabled;                       ///< empty = all enabled

    std::size_t size() const { return succ.size(); }
    bool enabled(NodeId s) const { return state_enabled.empty() || state_enabled[s]; }
    bool enabled(NodeId s, ActionId a) const {
        return enabled(s) && (action_enabled.empty() || action_enabled[s][a]);
    }

    /// Observed (or exact) graph of a full model.
    static ActionGraph from_model(const ExplicitModel& m);
};

/**
 * A (candidate) maximal end component: states T and retained actions A(s).
 * Gains are kept in reward units; an infinite upper gain means no upper
 * bound has been computed yet.
 */
struct MecRecord {
    std::vector<NodeId> states;                       ///< sorted
    std::map<NodeId, std::vector<ActionId>> actions;  ///< sorted per state
    bool delta_sure = false;
    double gain_lower = 0.0;
    double gain_upper = std::numeric_limits<double>::infinity();
    std::uint64_t sample_budget = 0;

    bool contains(NodeId s) const;
    bool has_action(NodeId s, ActionId a) const;
    std::size_t pair_count() const;
    /// True if every (state, action) pair of this record also belongs to other.
    bool subset_of(const MecRecord& other) const;
    bool same_component(const MecRecord& other) const;
};

/// All maximal end components of the enabled part of g.
std::vector<MecRecord> mec_decomposition(const ActionGraph& g);

/// Strongly connected components (iterative Tarjan) over enabled states and
/// actions. comp[s] is the component index, or -1 for disabled states.
std::vector<int> strongly_connected_components(const ActionGraph& g, int* component_count = nullptr);

/// Visit counts #(s,a), indexed like ActionGraph::succ.
using CountTable = std::vector<std::vector<std::uint64_t>>;

/**
 * True iff every state of T has at least one staying action and every
 * staying pair (observed successors nonempty and inside T) has been sampled
 * at least ec_required_samples(delta_tp, p_min) times. Pairs flagged in
 * known_complete (greybox: all successors seen) satisfy the threshold.
 */
bool is_delta_sure_ec(std::span<const NodeId> states, const ActionGraph& observed, const CountTable& counts,
                      double delta_tp, double p_min,
                      const std::vector<std::vector<char>>* known_complete = nullptr);

/// MECs of the observed graph after dropping every action sampled fewer than
/// the required number of times. Each record comes back with delta_sure set.
std::vector<MecRecord> find_delta_sure_mecs(const ActionGraph& observed, const CountTable& counts, double delta_tp,
                                            double p_min,
                                            const std::vector<std::vector<char>>* known_complete = nullptr);

/// Action value used for ranking in best_leaving_action.
struct ActionCandidate {
    NodeId state;
    ActionId action;  ///< kStayAction for stay
    std::string label;
    double upper;
    double lower;
    bool leaves;  ///< not retained by the MEC (stay counts as leaving)
};

/**
 * Best action that exits M: maximal upper value, ties broken by larger
 * lower value, then smaller state index, then label. nullopt means the MEC
 * is closed (no leaving action and no stay yet).
 */
std::optional<ActionCandidate> best_leaving_action(const MecRecord& mec, std::span<const ActionCandidate> candidates);

}  // namespace mppac
