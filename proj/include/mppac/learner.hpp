#pragma once

#include "mppac/mec_vi.hpp"
#include "mppac/oracle.hpp"
#include "mppac/partial_model.hpp"
#include "mppac/rng.hpp"
#include "mppac/stats.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace mppac {

enum class PrecisionMode { Relative, Absolute };

/// Time source for traces and timeouts. Steps reports oracle steps / 1e6 and
/// makes traces reproducible.
enum class ClockKind { Wall, Steps };

struct TraceRow {
    double seconds;
    std::uint64_t episodes;
    double lower;  ///< L(s_init), scaled
    double upper;  ///< U(s_init), scaled
    double r_max;
    double inconfidence;
};

struct LearnerConfig {
    double epsilon_mp = 0.01;
    double delta_mp = 0.1;
    unsigned revisit_threshold = 6;
    std::uint64_t episodes_per_round = 10000;
    PrecisionMode precision = PrecisionMode::Relative;
    double timeout_s = 1800.0;
    std::uint64_t seed = 1;
    LearnMode mode = LearnMode::Blackbox;
    double aperiodicity = 0.95;
    std::uint64_t initial_mec_samples = 10000;
    std::uint64_t mec_sample_multiplier = 5;

    bool anytime = false;                 ///< ignore the width test, run until timeout / max_rounds
    std::uint64_t max_rounds = 0;         ///< 0 = unlimited
    std::uint64_t max_episode_steps = 0;  ///< 0 = unlimited
    ClockKind clock = ClockKind::Wall;
    double mec_refine_fraction = 0.5;  ///< refine a MEC while its gap exceeds this share of the target width
    double vi_tolerance = 1e-6;
    std::size_t vi_max_sweeps = 100000;
    std::size_t mec_vi_max_iterations = 200000;
    bool exact_mec_bounds = false;  ///< CTMDP: exact sweep instead of the 3-call heuristic

    /// Called after every round; returning false stops the run at that boundary.
    std::function<bool(const TraceRow&)> on_round;
};

struct BoundsReport {
    std::vector<TraceRow> trace;
    double lower_mp = 0.0;  ///< reward units
    double upper_mp = 0.0;
    double certified_inconfidence = 0.0;
    double r_max = 0.0;
    bool converged = false;
    bool timed_out = false;
    std::uint64_t episodes = 0;
    std::uint64_t rounds = 0;
    std::uint64_t steps = 0;
};

/// Smallest initial * multiplier^j strictly greater than least_count.
std::uint64_t compute_n_samples(std::uint64_t least_count, std::uint64_t initial = 10000, std::uint64_t multiplier = 5);

/// True iff the MEC of the path-restricted, threshold-filtered observed graph
/// that contains s is a delta_tp-sure EC.
bool looping(std::span<const NodeId> path, NodeId s, const PartialModel& pm, double delta_tp, double p_min,
             LearnMode mode);

/// Candidate actions of a MEC for best_leaving_action: non-retained actions
/// and stay, valued by the current L/U.
std::vector<ActionCandidate> leaving_candidates(const PartialModel& pm, const MecRecord& m, double delta_tp,
                                                LearnMode mode);

struct EpisodeResult {
    std::vector<NodeId> path;  ///< ends in a pseudo-state
    int stay_mec = -1;         ///< MEC whose stay ended the episode
    NodeId stay_state = 0;
    bool aborted = false;      ///< step cap or timeout hit before a pseudo-state
};

/**
 * On-demand bounded value iteration for the mean payoff of an MDP (and the
 * shared driver for CTMDPs). One instance owns its partial model and random
 * stream; the oracle supplies the samples.
 */
class Learner {
public:
    Learner(SampleOracle& oracle, LearnerConfig config);
    virtual ~Learner() = default;

    BoundsReport run();

    EpisodeResult simulate_episode();
    /// One synchronous Bellman sweep; true if some value moved by more than the tolerance.
    bool global_update();
    void deflate(const MecRecord& m);
    /// Reinitialises L/U and iterates global_update + deflate to a fixpoint.
    void solve_reachability();
    void refresh_mecs();
    BoundPair update_mec_value(int mec_index, NodeId start);
    /// Returns false if a step left the MEC.
    bool simulate_mec(const MecRecord& m, std::uint64_t n_samples, NodeId start);

    double delta_tp() const;
    stats::InconfidenceBudget budget() const;
    double target_width() const;
    double certified_inconfidence() const;

    const PartialModel& partial() const { return pm_; }
    PartialModel& partial() { return pm_; }
    NodeId init_node() const { return init_; }

protected:
    /// Scaled gain bounds of a delta-sure MEC.
    virtual MecGain evaluate_mec(const MecRecord& m, double beta);

    NodeId node(StateId global);
    NodeId step(NodeId s, ActionId a);
    ActionId choose_action(NodeId s);
    NodeId take_stay(const MecRecord& m);
    /// Leaving action taken when an episode is caught in a known MEC.
    ActionCandidate choose_leaving(const MecRecord& m, NodeId s);
    double now() const;
    bool out_of_time() const;
    bool is_ctmdp() const { return oracle_.kind() == ModelKind::Ctmdp; }

    SampleOracle& oracle_;
    LearnerConfig cfg_;
    PartialModel pm_;
    Rng rng_;
    NodeId init_;
    std::uint64_t version_ = 0;
    std::uint64_t mec_version_ = ~std::uint64_t{0};
    std::chrono::steady_clock::time_point start_;
};

/// Runs the learner matching the oracle's model kind.
BoundsReport on_demand_bvi(SampleOracle& oracle, const LearnerConfig& config);

}  // namespace mppac
