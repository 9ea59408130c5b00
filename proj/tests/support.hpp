#pragma once

#include "mppac/graph.hpp"
#include "mppac/learn_ctmdp.hpp"
#include "mppac/model.hpp"
#include "mppac/partial_model.hpp"
#include "mppac/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mppac::testing {

inline std::string models_dir() { return MPPAC_MODELS_DIR; }

/// Random MDP with dense integer weights; p_min is the smallest probability.
inline ExplicitModel random_mdp(Rng& rng, std::size_t n, std::size_t max_actions, std::size_t max_succ,
                                double reward_max = 1.0) {
    ExplicitModel m;
    m.kind = ModelKind::Mdp;
    m.init = 0;
    m.reward.resize(n);
    m.rows.resize(n);
    double p_min = 1.0;
    for (StateId s = 0; s < n; ++s) {
        m.reward[s] = std::round(rng.uniform() * 4.0) / 4.0 * reward_max;
        const std::size_t acts = 1 + rng.below(max_actions);
        for (std::size_t a = 0; a < acts; ++a) {
            ActionRow row;
            row.label = "a" + std::to_string(a);
            const std::size_t k = 1 + rng.below(std::min(max_succ, n));
            std::set<StateId> targets;
            while (targets.size() < k) targets.insert(static_cast<StateId>(rng.below(n)));
            std::vector<double> w;
            double total = 0.0;
            for (std::size_t i = 0; i < k; ++i) {
                w.push_back(1.0 + static_cast<double>(rng.below(4)));
                total += w.back();
            }
            std::size_t i = 0;
            for (StateId t : targets) {
                const double p = w[i++] / total;
                row.successors.push_back({t, p});
                p_min = std::min(p_min, p);
            }
            m.rows[s].push_back(std::move(row));
        }
    }
    m.p_min = p_min * (1.0 - 1e-12);
    return m;
}

/// A (state set, action sets) pair in a representation independent of MecRecord.
using EcKey = std::pair<std::set<NodeId>, std::map<NodeId, std::set<ActionId>>>;

inline EcKey key_of(const MecRecord& r) {
    EcKey k;
    k.first.insert(r.states.begin(), r.states.end());
    for (const auto& [s, acts] : r.actions) k.second[s].insert(acts.begin(), acts.end());
    return k;
}

inline std::set<EcKey> keys_of(const std::vector<MecRecord>& recs) {
    std::set<EcKey> out;
    for (const auto& r : recs) out.insert(key_of(r));
    return out;
}

/**
 * Maximal end components by enumerating every state subset and every subset
 * of the actions of that subset, keeping the end components that no other
 * end component contains.
 */
inline std::set<EcKey> brute_force_mecs(const ActionGraph& g) {
    const std::size_t n = g.size();
    std::vector<EcKey> ecs;
    for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
        std::vector<NodeId> states;
        for (NodeId s = 0; s < n; ++s) {
            if (mask >> s & 1u) states.push_back(s);
        }
        std::vector<std::pair<NodeId, ActionId>> pairs;
        for (NodeId s : states) {
            for (ActionId a = 0; a < g.succ[s].size(); ++a) pairs.push_back({s, a});
        }
        for (std::uint64_t amask = 1; amask < (std::uint64_t{1} << pairs.size()); ++amask) {
            std::map<NodeId, std::set<ActionId>> acts;
            bool closed = true;
            for (std::size_t i = 0; i < pairs.size() && closed; ++i) {
                if (!(amask >> i & 1u)) continue;
                const auto [s, a] = pairs[i];
                for (NodeId t : g.succ[s][a]) {
                    if (!(mask >> t & 1u)) closed = false;
                }
                acts[s].insert(a);
            }
            if (!closed || acts.size() != states.size()) continue;
            // Strong connectivity by transitive closure over the chosen actions.
            std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
            for (const auto& [s, as] : acts) {
                reach[s][s] = 1;
                for (ActionId a : as) {
                    for (NodeId t : g.succ[s][a]) reach[s][t] = 1;
                }
            }
            for (NodeId k : states) {
                for (NodeId i : states) {
                    for (NodeId j : states) {
                        if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
                    }
                }
            }
            bool strong = true;
            for (NodeId i : states) {
                for (NodeId j : states) strong = strong && reach[i][j];
            }
            if (strong) ecs.push_back({std::set<NodeId>(states.begin(), states.end()), acts});
        }
    }
    auto contained = [](const EcKey& a, const EcKey& b) {
        for (const auto& [s, as] : a.second) {
            auto it = b.second.find(s);
            if (it == b.second.end()) return false;
            for (ActionId x : as) {
                if (!it->second.count(x)) return false;
            }
        }
        return true;
    };
    std::set<EcKey> out;
    for (const auto& e : ecs) {
        bool maximal = true;
        for (const auto& f : ecs) {
            if (&e != &f && e != f && contained(e, f)) maximal = false;
        }
        if (maximal) out.insert(e);
    }
    return out;
}

/// Registers every model state in the partial model (global id order) and
/// records `scale` * P(s,a,t) observations per transition. Returns the local
/// id of each model state.
inline std::vector<NodeId> load_counts(PartialModel& pm, const ExplicitModel& m, double scale) {
    std::vector<NodeId> local(m.state_count());
    for (StateId s = 0; s < m.state_count(); ++s) {
        if (auto found = pm.find(s)) {
            local[s] = *found;
            continue;
        }
        std::vector<std::string> labels;
        for (const auto& row : m.rows[s]) labels.push_back(row.label);
        local[s] = pm.add_state(s, m.reward[s], labels);
    }
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (ActionId a = 0; a < m.action_count(s); ++a) {
            const auto& row = m.rows[s][a];
            for (const auto& tr : row.successors) {
                const auto times = static_cast<std::uint64_t>(std::llround(tr.weight / row.total_weight() * scale));
                pm.record_many(local[s], a, local[tr.target], times);
            }
        }
    }
    return local;
}

/// Gains of the closed classes of a finite chain by power iteration on the
/// lazy chain. Entry i is the gain of the closed class containing i, or -1
/// for transient states. Time-weighted by 1/rate when rates are given.
inline std::vector<double> closed_class_gains(const std::vector<std::vector<double>>& P,
                                              const std::vector<double>& reward,
                                              const std::vector<double>& rate = {}) {
    const std::size_t n = P.size();
    std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        reach[i][i] = 1;
        for (std::size_t j = 0; j < n; ++j) {
            if (P[i][j] > 0.0) reach[i][j] = 1;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (reach[i][k] && reach[k][j]) reach[i][j] = 1;
            }
        }
    }
    std::vector<double> gain(n, -1.0);
    for (std::size_t i = 0; i < n; ++i) {
        bool closed = true;
        for (std::size_t j = 0; j < n; ++j) {
            if (reach[i][j] && !reach[j][i]) closed = false;
        }
        if (!closed) continue;
        std::vector<double> pi(n, 0.0);
        pi[i] = 1.0;
        for (int it = 0; it < 200000; ++it) {
            std::vector<double> next(n, 0.0);
            for (std::size_t a = 0; a < n; ++a) {
                next[a] += 0.5 * pi[a];
                for (std::size_t b = 0; b < n; ++b) next[b] += 0.5 * pi[a] * P[a][b];
            }
            double diff = 0.0;
            for (std::size_t a = 0; a < n; ++a) diff = std::max(diff, std::abs(next[a] - pi[a]));
            pi = std::move(next);
            if (diff < 1e-15) break;
        }
        double num = 0.0, den = 0.0;
        for (std::size_t a = 0; a < n; ++a) {
            const double w = rate.empty() ? pi[a] : pi[a] / rate[a];
            num += w * reward[a];
            den += w;
        }
        gain[i] = num / den;
    }
    return gain;
}

/// Irreducible single-action MEC with exact embedded probabilities.
struct RandomMec {
    IntervalMec mec;
    std::vector<std::vector<double>> P;
    std::vector<double> lambda;
    RateTable table;
};

inline RandomMec random_mec(Rng& rng, std::size_t n, double alpha) {
    RandomMec r;
    r.P.assign(n, std::vector<double>(n, 0.0));
    r.table.rates.resize(n);
    for (std::size_t s = 0; s < n; ++s) {
        r.mec.reward.push_back(rng.uniform());
        auto& row = r.P[s];
        row[(s + 1) % n] += 1.0;
        row[rng.below(n)] += rng.uniform();
        double tot = 0.0;
        for (double x : row) tot += x;
        IntervalAction act;
        for (NodeId t = 0; t < n; ++t) {
            row[t] /= tot;
            if (row[t] > 0.0) {
                act.edges.push_back({t, row[t]});
                act.seen.push_back(t);
            }
        }
        r.mec.actions.push_back({act});
        r.lambda.push_back(0.5 + 9.5 * rng.uniform());
        RateEstimate est;
        est.count = 1;
        est.lambda_hat = r.lambda.back();
        est.alpha = alpha;
        r.table.rates[s].push_back(est);
    }
    return r;
}

/// Gain of the chain under the given rates (test-side stationary analysis).
inline double chain_gain(const RandomMec& r, const std::vector<double>& rates) {
    return closed_class_gains(r.P, r.mec.reward, rates)[0];
}

inline std::pair<double, double> corner_extremes(const RandomMec& r, double alpha) {
    const std::size_t n = r.lambda.size();
    double lo = 1e9, hi = -1e9;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        std::vector<double> rates(n);
        for (std::size_t i = 0; i < n; ++i) rates[i] = r.lambda[i] * ((mask >> i & 1u) ? 1 + alpha : 1 - alpha);
        const double g = chain_gain(r, rates);
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    return {lo, hi};
}

/// Partial model of the whole model with random per-edge counts in [1, max_count].
inline PartialModel frozen_partial(const ExplicitModel& m, Rng& rng, std::uint64_t max_count = 400) {
    PartialModel pm;
    std::vector<NodeId> local(m.state_count());
    for (StateId s = 0; s < m.state_count(); ++s) {
        std::vector<std::string> labels;
        for (const auto& row : m.rows[s]) labels.push_back(row.label);
        local[s] = pm.add_state(s, m.reward[s], labels);
    }
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (ActionId a = 0; a < m.action_count(s); ++a) {
            for (const auto& tr : m.rows[s][a].successors) pm.record_many(local[s], a, local[tr.target], 1 + rng.below(max_count));
        }
    }
    return pm;
}

}  // namespace mppac::testing
