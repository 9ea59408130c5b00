#pragma once

#include <cstdint>
#include <istream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mppac {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

enum class ModelKind { Mdp, Ctmdp };

std::string_view to_string(ModelKind kind);

/// Raised by the parser and the validator. The message carries the line
/// number (syntax) or the offending (state, action) pair (semantics).
class ModelError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Transition {
    StateId target;
    double weight;  ///< probability (MDP) or rate (CTMDP)
};

struct ActionRow {
    std::string label;
    std::vector<Transition> successors;

    /// Sum of the weights: 1 for an MDP row, the exit rate for a CTMDP row.
    double total_weight() const;
};

/**
 * Fully known MDP or CTMDP. Only the sampling oracle and the whitebox solver
 * read this directly; learners see it through SampleOracle.
 */
struct ExplicitModel {
    ModelKind kind = ModelKind::Mdp;
    StateId init = 0;
    double p_min = 1.0;
    std::vector<double> reward;               ///< per state
    std::vector<std::vector<ActionRow>> rows; ///< rows[s][a]

    std::size_t state_count() const { return reward.size(); }
    std::size_t action_count(StateId s) const { return rows[s].size(); }
    const ActionRow& row(StateId s, ActionId a) const { return rows[s][a]; }

    /// Index of the action with the given label, or throws ModelError.
    ActionId find_action(StateId s, std::string_view label) const;

    /// Exit rate lambda(s,a); 1 for MDP rows.
    double exit_rate(StateId s, ActionId a) const;

    /// Probability of moving to t (embedded probability for a CTMDP).
    double probability(StateId s, ActionId a, StateId t) const;

    double max_reward() const;

    /// Throws ModelError if any structural invariant is violated.
    void validate() const;
};

/// Row sums of an MDP must match 1 within this tolerance.
inline constexpr double kRowSumTolerance = 1e-9;

/**
 * Parse the line-oriented model format:
 *
 *   mdp | ctmdp
 *   states N
 *   init I
 *   pmin P
 *   reward S R
 *   t S ACTION T PROB_OR_RATE
 *
 * '#' starts a comment. The result is validated before it is returned.
 */
ExplicitModel parse_model(std::istream& in);
ExplicitModel parse_model_string(std::string_view text);
ExplicitModel load_model(const std::string& path);

/// Serialise in the same format parse_model accepts.
std::string format_model(const ExplicitModel& m);

/// Embedded MDP of a CTMDP: probabilities R(s,a,t) / lambda(s,a).
ExplicitModel embedded_mdp(const ExplicitModel& m);

}  // namespace mppac
