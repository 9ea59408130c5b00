#pragma once

#include "mppac/graph.hpp"
#include "mppac/mec_vi.hpp"
#include "mppac/model.hpp"

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mppac {

/// Model too large for brute-force policy enumeration.
class SizeError : public std::length_error {
public:
    using std::length_error::length_error;
};

/// Interval MEC with exact (embedded) probabilities; rewards divided by r_scale.
IntervalMec exact_interval_mec(const ExplicitModel& model, const MecRecord& mec, double r_scale);

/// Maximal gain of a MEC in reward units, within beta. CTMDP MECs are
/// uniformized with their largest exit rate.
double exact_mec_gain(const MecRecord& mec, const ExplicitModel& model, double beta = 1e-6);

/**
 * Weighted MEC quotient. Node 0 is s+, node 1 is s-, every MEC is one node
 * with a stay action to s+ of mass gain/r_max, and every other state keeps
 * its own node. Actions retained inside a MEC disappear.
 */
struct WeightedQuotient {
    using Distribution = std::vector<std::pair<std::size_t, double>>;

    std::vector<MecRecord> mecs;
    std::vector<double> mec_gain;       ///< reward units
    std::vector<std::size_t> block_of;  ///< model state -> quotient node
    std::vector<double> stay;           ///< per node: stay mass to s+, or -1 if no stay
    std::vector<std::vector<Distribution>> rows;
    double r_max = 0.0;
    std::size_t init = 0;

    static constexpr std::size_t kPlus = 0;
    static constexpr std::size_t kMinus = 1;
    std::size_t size() const { return rows.size(); }
};

WeightedQuotient weighted_quotient(const ExplicitModel& model, double beta = 1e-6);

/// Interval iteration for maximal reachability of s+ on the quotient; values per node.
struct ReachabilityBounds {
    std::vector<double> lower;
    std::vector<double> upper;
};
ReachabilityBounds quotient_reachability(const WeightedQuotient& q, double tolerance = 1e-10,
                                         std::size_t max_sweeps = 10000000);

/// Maximal mean payoff from the initial state, via the weighted quotient.
double exact_mean_payoff(const ExplicitModel& model, double beta = 1e-6);

/// Gain from `from` of the chain induced by a positional policy.
double policy_gain(const ExplicitModel& model, const std::vector<ActionId>& policy, StateId from);

/// Maximum over all positional policies of policy_gain from the initial state.
double enumerate_policies_gain(const ExplicitModel& model, std::size_t max_policies = std::size_t{1} << 20);

}  // namespace mppac
