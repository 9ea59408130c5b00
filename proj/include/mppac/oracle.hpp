#pragma once

#include "mppac/model.hpp"
#include "mppac/rng.hpp"

#include <optional>
#include <stdexcept>

namespace mppac {

enum class InfoLevel { Blackbox, Greybox };

/// Raised when a learner asks for information its access level does not grant.
class CapabilityError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

struct StepSample {
    StateId successor;
    std::optional<double> dwell;  ///< residence time; present iff the model is a CTMDP
};

/**
 * Learner-facing simulator. Exposes the initial state, the available actions
 * of a visited state, its reward, p_min and a sampling primitive; greybox
 * access adds |post(s,a)|. Probabilities, rates and successor sets stay
 * hidden.
 *
 * The model is shared read-only; the generator is owned by the oracle, so
 * use one oracle per learner thread.
 */
class SampleOracle {
public:
    SampleOracle(const ExplicitModel& model, InfoLevel level, std::uint64_t seed);

    ModelKind kind() const { return model_->kind; }
    InfoLevel info_level() const { return level_; }
    StateId initial_state() const { return model_->init; }
    double p_min() const { return model_->p_min; }

    std::size_t action_count(StateId s) const;
    const std::string& action_label(StateId s, ActionId a) const;
    /// Reward (per step, or per unit time for a CTMDP) observed in s.
    double reward(StateId s) const;

    StepSample sample_step(StateId s, ActionId a);
    StepSample sample_step(StateId s, std::string_view label);

    /// |post(s,a)|; greybox only.
    std::size_t successor_count(StateId s, ActionId a) const;

    std::uint64_t steps_taken() const { return steps_; }

private:
    void check(StateId s, ActionId a) const;

    const ExplicitModel* model_;
    InfoLevel level_;
    Rng rng_;
    std::uint64_t steps_ = 0;
};

}  // namespace mppac
