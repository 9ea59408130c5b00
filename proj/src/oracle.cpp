#include "mppac/oracle.hpp"

#include <cmath>

namespace mppac {

SampleOracle::SampleOracle(const ExplicitModel& model, InfoLevel level, std::uint64_t seed)
    : model_(&model), level_(level), rng_(seed) {}

void SampleOracle::check(StateId s, ActionId a) const {
    if (s >= model_->state_count()) throw ModelError("unknown state " + std::to_string(s));
    if (a >= model_->action_count(s))
        throw ModelError("unknown action index " + std::to_string(a) + " for state " + std::to_string(s));
}

std::size_t SampleOracle::action_count(StateId s) const {
    if (s >= model_->state_count()) throw ModelError("unknown state " + std::to_string(s));
    return model_->action_count(s);
}

const std::string& SampleOracle::action_label(StateId s, ActionId a) const {
    check(s, a);
    return model_->rows[s][a].label;
}

double SampleOracle::reward(StateId s) const {
    if (s >= model_->state_count()) throw ModelError("unknown state " + std::to_string(s));
    return model_->reward[s];
}

StepSample SampleOracle::sample_step(StateId s, ActionId a) {
    check(s, a);
    const auto& row = model_->rows[s][a];
    const double total = row.total_weight();
    // Successor by inverse CDF over the row; the last positive entry absorbs rounding.
    const double target = rng_.uniform() * total;
    double acc = 0.0;
    StateId succ = row.successors.back().target;
    for (const auto& tr : row.successors) {
        if (tr.weight <= 0.0) continue;
        acc += tr.weight;
        succ = tr.target;
        if (target < acc) break;
    }
    ++steps_;
    StepSample out{succ, std::nullopt};
    if (model_->kind == ModelKind::Ctmdp) {
        out.dwell = -std::log(rng_.uniform_open_closed()) / total;
    }
    return out;
}

StepSample SampleOracle::sample_step(StateId s, std::string_view label) {
    return sample_step(s, model_->find_action(s, label));
}

std::size_t SampleOracle::successor_count(StateId s, ActionId a) const {
    if (level_ != InfoLevel::Greybox) throw CapabilityError("successor_count requires greybox access");
    check(s, a);
    std::size_t n = 0;
    for (const auto& tr : model_->rows[s][a].successors) {
        if (tr.weight > 0.0) ++n;
    }
    return n;
}

}  // namespace mppac
