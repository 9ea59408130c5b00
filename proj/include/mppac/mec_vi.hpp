#pragma once

#include "mppac/partial_model.hpp"

#include <cstddef>
#include <vector>

namespace mppac {

/// One action of an interval MEC. Edge targets are MEC-local indices; the
/// mass 1 - sum(lower) is distributed adversarially over `seen`.
struct IntervalAction {
    std::vector<EdgeEstimate> edges;
    std::vector<NodeId> seen;
};

/// An end component whose transition probabilities are known up to lower
/// bounds. Rewards are scaled to [0, 1].
struct IntervalMec {
    std::vector<double> reward;
    std::vector<std::vector<IntervalAction>> actions;

    std::size_t size() const { return reward.size(); }
};

struct MecGain {
    double lower;
    double upper;
    std::size_t iterations;
    bool converged;
};

/**
 * Relative value iteration for the gain of an interval MEC. Every step is
 * mixed with a self-loop of mass 1 - y, which keeps the gain and removes
 * periodicity. Stops when the spans of both one-step differences are at most
 * beta; the returned bounds are the min (lower) and max (upper) of those
 * differences, clamped to [0, 1].
 */
MecGain mec_value_iteration(const IntervalMec& mec, double beta, double y = 0.95, std::size_t max_iterations = 200000);

/// Interval MEC of a record, from the learner's counts.
IntervalMec interval_mec(const PartialModel& pm, const MecRecord& rec, double delta_tp);

}  // namespace mppac
