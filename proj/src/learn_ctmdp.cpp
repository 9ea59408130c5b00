#include "mppac/learn_ctmdp.hpp"

#include "mppac/stats.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>

namespace mppac {

RateEstimate RateEstimate::from_dwell(std::uint64_t count, double sum, double delta_r) {
    RateEstimate r;
    r.count = count;
    r.dwell_sum = sum;
    if (count > 0 && sum > 0.0) {
        r.lambda_hat = static_cast<double>(count) / sum;
        r.alpha = stats::rate_alpha_for_samples(count, delta_r);
    }
    return r;
}

std::optional<double> RateTable::mec_alpha() const {
    double alpha = 0.0;
    for (const auto& row : rates) {
        for (const auto& r : row) {
            if (!r.alpha) return std::nullopt;
            alpha = std::max(alpha, *r.alpha);
        }
    }
    return alpha;
}

UniformizedMec uniformize(const IntervalMec& embedded, const std::vector<std::vector<double>>& rates,
                          std::optional<double> C) {
    double max_rate = 0.0;
    for (const auto& row : rates) {
        for (double l : row) max_rate = std::max(max_rate, l);
    }
    const double c = C.value_or(max_rate);
    if (!(c > 0.0) || c < max_rate * (1.0 - 1e-12))
        throw stats::DomainError("uniformization constant below a rate");

    UniformizedMec out{c, {}};
    out.mec.reward = embedded.reward;
    out.mec.actions.resize(embedded.size());
    for (NodeId s = 0; s < embedded.size(); ++s) {
        for (std::size_t a = 0; a < embedded.actions[s].size(); ++a) {
            const auto& src = embedded.actions[s][a];
            const double scale = std::min(1.0, rates[s][a] / c);
            IntervalAction act;
            act.seen = src.seen;
            double self = 1.0 - scale;
            for (const auto& e : src.edges) {
                if (e.target == s) self += e.lower * scale;
                else act.edges.push_back({e.target, e.lower * scale});
            }
            if (self > 0.0) act.edges.push_back({s, self});
            out.mec.actions[s].push_back(std::move(act));
        }
    }
    return out;
}

double ctmdp_mec_gain(std::span<const double> pi, std::span<const double> reward, std::span<const double> lambda) {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) {
        num += reward[i] * pi[i] / lambda[i];
        den += pi[i] / lambda[i];
    }
    return den > 0.0 ? num / den : 0.0;
}

std::vector<double> boundary_rate_factors(std::size_t m, double alpha, std::size_t j, RateDirection dir) {
    std::vector<double> f(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool head = i < j;
        const bool slow = dir == RateDirection::Max ? head : !head;
        f[i] = slow ? 1.0 - alpha : 1.0 + alpha;
    }
    return f;
}

std::vector<double> boundary_rate_assignment(std::span<const double> lambda_hat, double alpha, std::size_t j,
                                             RateDirection dir) {
    const auto f = boundary_rate_factors(lambda_hat.size(), alpha, j, dir);
    std::vector<double> out(lambda_hat.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = lambda_hat[i] * f[i];
    return out;
}

std::vector<std::size_t> reward_order(std::span<const double> reward) {
    std::vector<std::size_t> idx(reward.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return reward[a] > reward[b]; });
    return idx;
}

MecGain uniformized_gain(const IntervalMec& embedded, const RateTable& table, std::span<const double> state_factor,
                         const RateBoundsConfig& cfg) {
    std::vector<std::vector<double>> rates(embedded.size());
    for (NodeId s = 0; s < embedded.size(); ++s) {
        for (const auto& r : table.rates[s]) rates[s].push_back(r.lambda_hat * state_factor[s]);
    }
    const auto u = uniformize(embedded, rates, cfg.C);
    return mec_value_iteration(u.mec, cfg.beta, cfg.y, cfg.max_iterations);
}

namespace {

std::vector<double> to_states(const std::vector<double>& sorted_factors, const std::vector<std::size_t>& order) {
    std::vector<double> f(order.size());
    for (std::size_t i = 0; i < order.size(); ++i) f[order[i]] = sorted_factors[i];
    return f;
}

}  // namespace

BoundPair find_mec_mp_bounds_exact(const IntervalMec& embedded, const RateTable& table, double alpha,
                                   const RateBoundsConfig& cfg) {
    const std::size_t m = embedded.size();
    const auto order = reward_order(embedded.reward);

    double upper = -1.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const auto f = to_states(boundary_rate_factors(m, alpha, j, RateDirection::Max), order);
        const double v = uniformized_gain(embedded, table, f, cfg).upper;
        if (v < upper) break;
        upper = v;
    }
    double lower = 2.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const auto f = to_states(boundary_rate_factors(m, alpha, j, RateDirection::Min), order);
        const double v = uniformized_gain(embedded, table, f, cfg).lower;
        if (v > lower) break;
        lower = v;
    }
    return {std::min(lower, upper), upper};
}

BoundPair find_mec_mp_bounds_heuristic(const IntervalMec& embedded, const RateTable& table, double alpha,
                                       const RateBoundsConfig& cfg) {
    const std::size_t m = embedded.size();
    const std::vector<double> ones(m, 1.0);
    const auto plain = uniformized_gain(embedded, table, ones, cfg);
    const double v_hat = 0.5 * (plain.lower + plain.upper);
    std::vector<double> f_l(m), f_u(m);
    for (std::size_t s = 0; s < m; ++s) {
        const bool high = embedded.reward[s] >= v_hat;
        f_l[s] = high ? 1.0 + alpha : 1.0 - alpha;
        f_u[s] = high ? 1.0 - alpha : 1.0 + alpha;
    }
    const double lower = uniformized_gain(embedded, table, f_l, cfg).lower;
    const double upper = uniformized_gain(embedded, table, f_u, cfg).upper;
    return {std::min(lower, upper), upper};
}

RateTable rate_table(const PartialModel& pm, const MecRecord& rec, double delta_r) {
    RateTable t;
    t.rates.resize(rec.states.size());
    for (std::size_t i = 0; i < rec.states.size(); ++i) {
        const NodeId s = rec.states[i];
        auto it = rec.actions.find(s);
        if (it == rec.actions.end()) continue;
        for (ActionId a : it->second) {
            const auto& p = pm.pair(s, a);
            t.rates[i].push_back(RateEstimate::from_dwell(p.dwell_count, p.dwell_sum, delta_r));
        }
    }
    return t;
}

CtmdpLearner::CtmdpLearner(SampleOracle& oracle, LearnerConfig config) : Learner(oracle, std::move(config)) {}

MecGain CtmdpLearner::evaluate_mec(const MecRecord& m, double beta) {
    const auto b = budget();
    const auto im = interval_mec(pm_, m, b.delta_tp);
    const auto table = rate_table(pm_, m, b.delta_r);
    const auto alpha = table.mec_alpha();
    if (!alpha) return {0.0, 1.0, 0, false};
    double max_rate = 0.0;
    for (const auto& row : table.rates) {
        for (const auto& r : row) max_rate = std::max(max_rate, r.lambda_hat);
    }
    RateBoundsConfig rc{beta, cfg_.aperiodicity, cfg_.mec_vi_max_iterations, max_rate * (1.0 + *alpha)};
    const auto bounds = cfg_.exact_mec_bounds ? find_mec_mp_bounds_exact(im, table, *alpha, rc)
                                              : find_mec_mp_bounds_heuristic(im, table, *alpha, rc);
    return {bounds.lower, bounds.upper, 0, true};
}

}  // namespace mppac
