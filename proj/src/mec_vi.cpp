#include "mppac/mec_vi.hpp"

#include <algorithm>
#include <limits>
#include <unordered_map>

namespace mppac {

namespace {

double sweep_action(const IntervalAction& act, const std::vector<double>& v, bool upper) {
    double acc = 0.0;
    double mass = 0.0;
    for (const auto& e : act.edges) {
        acc += e.lower * v[e.target];
        mass += e.lower;
    }
    const double residual = std::max(0.0, 1.0 - mass);
    if (residual > 0.0 && !act.seen.empty()) {
        double extreme = v[act.seen.front()];
        for (NodeId t : act.seen) extreme = upper ? std::max(extreme, v[t]) : std::min(extreme, v[t]);
        acc += residual * extreme;
    }
    return acc;
}

}  // namespace

MecGain mec_value_iteration(const IntervalMec& mec, double beta, double y, std::size_t max_iterations) {
    const std::size_t n = mec.size();
    if (n == 0) return {0.0, 0.0, 0, true};
    std::vector<double> l(n, 0.0), u(n, 0.0), nl(n), nu(n);
    MecGain out{0.0, 1.0, 0, false};
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        double dl_min = std::numeric_limits<double>::infinity(), dl_max = -dl_min;
        double du_min = dl_min, du_max = -dl_min;
        for (std::size_t s = 0; s < n; ++s) {
            double best_l = -std::numeric_limits<double>::infinity();
            double best_u = best_l;
            for (const auto& act : mec.actions[s]) {
                best_l = std::max(best_l, sweep_action(act, l, false));
                best_u = std::max(best_u, sweep_action(act, u, true));
            }
            nl[s] = mec.reward[s] + y * best_l + (1.0 - y) * l[s];
            nu[s] = mec.reward[s] + y * best_u + (1.0 - y) * u[s];
            const double dl = nl[s] - l[s];
            const double du = nu[s] - u[s];
            dl_min = std::min(dl_min, dl);
            dl_max = std::max(dl_max, dl);
            du_min = std::min(du_min, du);
            du_max = std::max(du_max, du);
        }
        out = {std::clamp(dl_min, 0.0, 1.0), std::clamp(du_max, 0.0, 1.0), it, false};
        if (dl_max - dl_min <= beta && du_max - du_min <= beta) {
            out.converged = true;
            break;
        }
        // Shift by a constant to keep magnitudes bounded; differences are unaffected.
        const double sl = nl[0];
        const double su = nu[0];
        for (std::size_t s = 0; s < n; ++s) {
            l[s] = nl[s] - sl;
            u[s] = nu[s] - su;
        }
    }
    if (out.lower > out.upper) out.lower = out.upper;
    return out;
}

IntervalMec interval_mec(const PartialModel& pm, const MecRecord& rec, double delta_tp) {
    IntervalMec m;
    std::unordered_map<NodeId, NodeId> index;
    for (NodeId s : rec.states) index.emplace(s, static_cast<NodeId>(index.size()));
    const double r_max = pm.r_max();
    m.reward.reserve(rec.states.size());
    m.actions.resize(rec.states.size());
    for (NodeId s : rec.states) {
        const NodeId ls = index.at(s);
        m.reward.push_back(r_max > 0.0 ? pm.reward(s) / r_max : 0.0);
        auto it = rec.actions.find(s);
        if (it == rec.actions.end()) continue;
        for (ActionId a : it->second) {
            IntervalAction act;
            for (const auto& e : pm.estimates(s, a, delta_tp)) {
                auto t = index.find(e.target);
                if (t == index.end()) continue;  // retained actions stay inside
                act.edges.push_back({t->second, e.lower});
                act.seen.push_back(t->second);
            }
            m.actions[ls].push_back(std::move(act));
        }
    }
    return m;
}

}  // namespace mppac
