#include "mppac/whitebox.hpp"

#include "mppac/learn_ctmdp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mppac {

IntervalMec exact_interval_mec(const ExplicitModel& model, const MecRecord& mec, double r_scale) {
    IntervalMec m;
    std::unordered_map<NodeId, NodeId> index;
    for (NodeId s : mec.states) index.emplace(s, static_cast<NodeId>(index.size()));
    m.actions.resize(mec.states.size());
    for (NodeId s : mec.states) {
        m.reward.push_back(r_scale > 0.0 ? model.reward[s] / r_scale : 0.0);
        auto it = mec.actions.find(s);
        if (it == mec.actions.end()) continue;
        for (ActionId a : it->second) {
            IntervalAction act;
            for (const auto& tr : model.rows[s][a].successors) {
                if (tr.weight <= 0.0) continue;
                const NodeId t = index.at(tr.target);
                act.edges.push_back({t, tr.weight / model.rows[s][a].total_weight()});
                act.seen.push_back(t);
            }
            m.actions[index.at(s)].push_back(std::move(act));
        }
    }
    return m;
}

double exact_mec_gain(const MecRecord& mec, const ExplicitModel& model, double beta) {
    double r_scale = 0.0;
    for (NodeId s : mec.states) r_scale = std::max(r_scale, model.reward[s]);
    if (r_scale <= 0.0) return 0.0;
    IntervalMec im = exact_interval_mec(model, mec, r_scale);
    if (model.kind == ModelKind::Ctmdp) {
        std::vector<std::vector<double>> rates(im.size());
        for (std::size_t i = 0; i < mec.states.size(); ++i) {
            for (ActionId a : mec.actions.at(mec.states[i])) rates[i].push_back(model.exit_rate(mec.states[i], a));
        }
        im = uniformize(im, rates).mec;
    }
    const auto g = mec_value_iteration(im, beta / r_scale, 0.95, 10000000);
    return 0.5 * (g.lower + g.upper) * r_scale;
}

WeightedQuotient weighted_quotient(const ExplicitModel& model, double beta) {
    WeightedQuotient q;
    q.r_max = model.max_reward();
    q.mecs = mec_decomposition(ActionGraph::from_model(model));
    const std::size_t n = model.state_count();
    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    q.block_of.assign(n, kNone);
    q.rows.resize(2);
    q.stay.assign(2, -1.0);
    for (std::size_t i = 0; i < q.mecs.size(); ++i) {
        const std::size_t node = q.rows.size();
        q.rows.emplace_back();
        const double g = exact_mec_gain(q.mecs[i], model, beta);
        q.mec_gain.push_back(g);
        q.stay.push_back(q.r_max > 0.0 ? std::clamp(g / q.r_max, 0.0, 1.0) : 0.0);
        for (NodeId s : q.mecs[i].states) q.block_of[s] = node;
    }
    for (StateId s = 0; s < n; ++s) {
        if (q.block_of[s] != kNone) continue;
        q.block_of[s] = q.rows.size();
        q.rows.emplace_back();
        q.stay.push_back(-1.0);
    }
    for (StateId s = 0; s < n; ++s) {
        const std::size_t node = q.block_of[s];
        const int mec = [&] {
            for (std::size_t i = 0; i < q.mecs.size(); ++i) {
                if (q.mecs[i].contains(s)) return static_cast<int>(i);
            }
            return -1;
        }();
        for (ActionId a = 0; a < model.action_count(s); ++a) {
            if (mec >= 0 && q.mecs[mec].has_action(s, a)) continue;
            std::map<std::size_t, double> dist;
            for (const auto& tr : model.rows[s][a].successors) {
                if (tr.weight > 0.0) dist[q.block_of[tr.target]] += tr.weight / model.rows[s][a].total_weight();
            }
            q.rows[node].emplace_back(dist.begin(), dist.end());
        }
    }
    q.init = q.block_of[model.init];
    return q;
}

ReachabilityBounds quotient_reachability(const WeightedQuotient& q, double tolerance, std::size_t max_sweeps) {
    const std::size_t n = q.size();
    ReachabilityBounds b{std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
    b.lower[WeightedQuotient::kPlus] = 1.0;
    b.upper[WeightedQuotient::kMinus] = 0.0;
    // Nodes without any action (absorbing non-MEC states cannot occur, but keep them safe).
    for (std::size_t v = 2; v < n; ++v) {
        if (q.rows[v].empty() && q.stay[v] < 0.0) b.upper[v] = 0.0;
    }
    for (std::size_t sweep = 0; sweep < max_sweeps; ++sweep) {
        double diff = 0.0;
        for (std::size_t v = 2; v < n; ++v) {
            double lo = q.stay[v] >= 0.0 ? q.stay[v] : 0.0;
            double hi = lo;
            for (const auto& row : q.rows[v]) {
                double l = 0.0, u = 0.0;
                for (const auto& [t, p] : row) {
                    l += p * b.lower[t];
                    u += p * b.upper[t];
                }
                lo = std::max(lo, l);
                hi = std::max(hi, u);
            }
            if (q.rows[v].empty() && q.stay[v] < 0.0) hi = 0.0;
            b.lower[v] = lo;
            b.upper[v] = hi;
            diff = std::max(diff, hi - lo);
        }
        if (diff <= tolerance) break;
    }
    return b;
}

double exact_mean_payoff(const ExplicitModel& model, double beta) {
    const auto q = weighted_quotient(model, beta);
    if (q.r_max <= 0.0) return 0.0;
    const auto b = quotient_reachability(q, std::min(1e-10, beta / q.r_max));
    return 0.5 * (b.lower[q.init] + b.upper[q.init]) * q.r_max;
}

double policy_gain(const ExplicitModel& model, const std::vector<ActionId>& policy, StateId from) {
    const std::size_t n = model.state_count();
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
    ActionGraph g;
    g.succ.resize(n);
    for (StateId s = 0; s < n; ++s) {
        std::vector<NodeId> out;
        for (const auto& tr : model.rows[s][policy[s]].successors) {
            if (tr.weight <= 0.0) continue;
            P(s, tr.target) += tr.weight / model.rows[s][policy[s]].total_weight();
            out.push_back(tr.target);
        }
        g.succ[s].push_back(std::move(out));
    }
    int count = 0;
    const auto comp = strongly_connected_components(g, &count);
    std::vector<char> bottom(count, 1);
    for (StateId s = 0; s < n; ++s) {
        for (NodeId t : g.succ[s][0]) {
            if (comp[t] != comp[s]) bottom[comp[s]] = 0;
        }
    }

    // Gain of each bottom class from its stationary distribution.
    std::vector<double> class_gain(count, 0.0);
    for (int c = 0; c < count; ++c) {
        if (!bottom[c]) continue;
        std::vector<StateId> members;
        for (StateId s = 0; s < n; ++s) {
            if (comp[s] == c) members.push_back(s);
        }
        const std::size_t m = members.size();
        Eigen::MatrixXd A(m, m);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < m; ++j) A(j, i) = P(members[i], members[j]) - (i == j ? 1.0 : 0.0);
        }
        A.row(m - 1).setOnes();
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
        rhs(m - 1) = 1.0;
        const Eigen::VectorXd pi = A.fullPivLu().solve(rhs);
        std::vector<double> pv(pi.data(), pi.data() + m), rv, lv;
        for (StateId s : members) {
            rv.push_back(model.reward[s]);
            lv.push_back(model.kind == ModelKind::Ctmdp ? model.exit_rate(s, policy[s]) : 1.0);
        }
        class_gain[c] = ctmdp_mec_gain(pv, rv, lv);
    }
    if (bottom[comp[from]]) return class_gain[comp[from]];

    // Absorption into bottom classes from transient states: (I - Q) x = b.
    std::vector<StateId> transient;
    std::vector<int> tindex(n, -1);
    for (StateId s = 0; s < n; ++s) {
        if (!bottom[comp[s]]) {
            tindex[s] = static_cast<int>(transient.size());
            transient.push_back(s);
        }
    }
    const std::size_t k = transient.size();
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(k, k);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    for (std::size_t i = 0; i < k; ++i) {
        const StateId s = transient[i];
        for (StateId t = 0; t < n; ++t) {
            if (P(s, t) == 0.0) continue;
            if (tindex[t] >= 0) A(i, tindex[t]) -= P(s, t);
            else rhs(i) += P(s, t) * class_gain[comp[t]];
        }
    }
    const Eigen::VectorXd x = A.fullPivLu().solve(rhs);
    return x(tindex[from]);
}

double enumerate_policies_gain(const ExplicitModel& model, std::size_t max_policies) {
    const std::size_t n = model.state_count();
    double total = 1.0;
    for (StateId s = 0; s < n; ++s) total *= static_cast<double>(model.action_count(s));
    if (total > static_cast<double>(max_policies))
        throw SizeError("policy enumeration over " + std::to_string(total) + " policies exceeds the limit");
    std::vector<ActionId> policy(n, 0);
    double best = -1.0;
    while (true) {
        best = std::max(best, policy_gain(model, policy, model.init));
        std::size_t i = 0;
        while (i < n) {
            if (++policy[i] < model.action_count(i)) break;
            policy[i] = 0;
            ++i;
        }
        if (i == n) break;
    }
    return best;
}

}  // namespace mppac
