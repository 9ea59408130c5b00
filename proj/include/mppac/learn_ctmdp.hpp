#pragma once

#include "mppac/learner.hpp"
#include "mppac/mec_vi.hpp"

#include <optional>
#include <span>
#include <vector>

namespace mppac {

/// Rate estimate of one (state, action) pair.
struct RateEstimate {
    std::uint64_t count = 0;
    double dwell_sum = 0.0;
    double lambda_hat = 0.0;
    std::optional<double> alpha;  ///< certified precision; nullopt while too few samples

    static RateEstimate from_dwell(std::uint64_t count, double sum, double delta_r);
};

/// Rate table of an interval MEC: rates[s][a] parallel to IntervalMec::actions.
struct RateTable {
    std::vector<std::vector<RateEstimate>> rates;

    /// Largest per-pair alpha (the MEC-level precision), nullopt if any pair is uncertified.
    std::optional<double> mec_alpha() const;
};

struct UniformizedMec {
    double C;
    IntervalMec mec;  ///< self-loop remainders folded into each state's own edge
};

/**
 * Uniformizes an embedded interval MEC under per-pair rates. Each lower
 * estimate is scaled by lambda(s,a)/C and the remainder 1 - lambda/C becomes a
 * self-loop. C defaults to the largest rate; a smaller C is a domain error.
 */
UniformizedMec uniformize(const IntervalMec& embedded, const std::vector<std::vector<double>>& rates,
                          std::optional<double> C = std::nullopt);

/// sum r_i pi_i / lambda_i over sum pi_i / lambda_i.
double ctmdp_mec_gain(std::span<const double> pi, std::span<const double> reward, std::span<const double> lambda);

enum class RateDirection { Max, Min };

/**
 * Per-state rate factors for a split index j over states sorted by reward
 * (descending, ties by index). Max: the first j states get lambda(1-alpha),
 * the rest lambda(1+alpha). Min mirrors this.
 */
std::vector<double> boundary_rate_factors(std::size_t m, double alpha, std::size_t j, RateDirection dir);

/// Boundary assignment on per-state rates.
std::vector<double> boundary_rate_assignment(std::span<const double> lambda_hat, double alpha, std::size_t j,
                                             RateDirection dir);

/// Order of states by descending reward, ties by index.
std::vector<std::size_t> reward_order(std::span<const double> reward);

struct RateBoundsConfig {
    double beta = 1e-6;
    double y = 0.95;
    std::size_t max_iterations = 200000;
    std::optional<double> C;  ///< default: max lambda_hat (1 + alpha)
};

/// Gain bounds of the MEC under per-state rate factors applied to lambda_hat.
MecGain uniformized_gain(const IntervalMec& embedded, const RateTable& table, std::span<const double> state_factor,
                         const RateBoundsConfig& cfg);

/// Sweep over split indices with early stop, for both directions.
BoundPair find_mec_mp_bounds_exact(const IntervalMec& embedded, const RateTable& table, double alpha,
                                   const RateBoundsConfig& cfg);

/// Three gain computations: plain estimate, then pessimistic and optimistic
/// rates chosen by comparing each reward with the plain estimate.
BoundPair find_mec_mp_bounds_heuristic(const IntervalMec& embedded, const RateTable& table, double alpha,
                                       const RateBoundsConfig& cfg);

/// Rate table for a MEC record from the learner's dwell statistics.
RateTable rate_table(const PartialModel& pm, const MecRecord& rec, double delta_r);

/// The MDP learner with MEC gains computed from estimated rates.
class CtmdpLearner : public Learner {
public:
    CtmdpLearner(SampleOracle& oracle, LearnerConfig config);

protected:
    MecGain evaluate_mec(const MecRecord& m, double beta) override;
};

}  // namespace mppac
