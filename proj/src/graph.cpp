#include "mppac/graph.hpp"

#include "mppac/stats.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace mppac {

ActionGraph ActionGraph::from_model(const ExplicitModel& m) {
    ActionGraph g;
    g.succ.resize(m.state_count());
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (const auto& row : m.rows[s]) {
            std::vector<NodeId> out;
            for (const auto& tr : row.successors) {
                if (tr.weight > 0.0) out.push_back(tr.target);
            }
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            g.succ[s].push_back(std::move(out));
        }
    }
    return g;
}

bool MecRecord::contains(NodeId s) const { return std::binary_search(states.begin(), states.end(), s); }

bool MecRecord::has_action(NodeId s, ActionId a) const {
    auto it = actions.find(s);
    return it != actions.end() && std::binary_search(it->second.begin(), it->second.end(), a);
}

std::size_t MecRecord::pair_count() const {
    std::size_t n = 0;
    for (const auto& [s, acts] : actions) n += acts.size();
    return n;
}

bool MecRecord::subset_of(const MecRecord& other) const {
    for (const auto& [s, acts] : actions) {
        for (ActionId a : acts) {
            if (!other.has_action(s, a)) return false;
        }
    }
    return std::includes(other.states.begin(), other.states.end(), states.begin(), states.end());
}

bool MecRecord::same_component(const MecRecord& other) const {
    return states == other.states && actions == other.actions;
}

std::vector<int> strongly_connected_components(const ActionGraph& g, int* component_count) {
    const auto n = static_cast<NodeId>(g.size());
    std::vector<int> comp(n, -1);
    std::vector<int> index(n, -1);
    std::vector<int> low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<NodeId> stack;
    int next_index = 0;
    int next_comp = 0;

    // Flattened successor lists of the enabled part.
    std::vector<std::vector<NodeId>> adj(n);
    for (NodeId s = 0; s < n; ++s) {
        if (!g.enabled(s)) continue;
        for (ActionId a = 0; a < g.succ[s].size(); ++a) {
            if (!g.enabled(s, a)) continue;
            for (NodeId t : g.succ[s][a]) {
                if (g.enabled(t)) adj[s].push_back(t);
            }
        }
    }

    struct Frame {
        NodeId node;
        std::size_t edge;
    };
    std::vector<Frame> call;
    for (NodeId root = 0; root < n; ++root) {
        if (!g.enabled(root) || index[root] != -1) continue;
        call.push_back({root, 0});
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            const NodeId v = f.node;
            if (f.edge < adj[v].size()) {
                const NodeId w = adj[v][f.edge++];
                if (index[w] == -1) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                NodeId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            call.pop_back();
            if (!call.empty()) {
                const NodeId parent = call.back().node;
                low[parent] = std::min(low[parent], low[v]);
            }
        }
    }
    if (component_count) *component_count = next_comp;
    return comp;
}

std::vector<MecRecord> mec_decomposition(const ActionGraph& g) {
    const auto n = static_cast<NodeId>(g.size());
    ActionGraph work;
    work.succ = g.succ;  // successor lists are read-only below; masks carry the state
    work.state_enabled.assign(n, 0);
    work.action_enabled.resize(n);
    for (NodeId s = 0; s < n; ++s) {
        work.state_enabled[s] = g.enabled(s) ? 1 : 0;
        work.action_enabled[s].assign(g.succ[s].size(), 0);
        for (ActionId a = 0; a < g.succ[s].size(); ++a) {
            work.action_enabled[s][a] = g.enabled(s, a) && !g.succ[s][a].empty() ? 1 : 0;
        }
    }

    std::vector<int> comp;
    bool changed = true;
    while (changed) {
        changed = false;
        comp = strongly_connected_components(work);
        for (NodeId s = 0; s < n; ++s) {
            if (!work.state_enabled[s]) continue;
            bool any = false;
            for (ActionId a = 0; a < work.succ[s].size(); ++a) {
                if (!work.action_enabled[s][a]) continue;
                bool stays = true;
                for (NodeId t : work.succ[s][a]) {
                    if (!work.state_enabled[t] || comp[t] != comp[s]) {
                        stays = false;
                        break;
                    }
                }
                if (!stays) {
                    work.action_enabled[s][a] = 0;
                    changed = true;
                } else {
                    any = true;
                }
            }
            if (!any) {
                work.state_enabled[s] = 0;
                changed = true;
            }
        }
    }

    std::map<int, MecRecord> by_comp;
    for (NodeId s = 0; s < n; ++s) {
        if (!work.state_enabled[s]) continue;
        auto& rec = by_comp[comp[s]];
        rec.states.push_back(s);
        auto& acts = rec.actions[s];
        for (ActionId a = 0; a < work.succ[s].size(); ++a) {
            if (work.action_enabled[s][a]) acts.push_back(a);
        }
    }
    std::vector<MecRecord> out;
    out.reserve(by_comp.size());
    for (auto& [c, rec] : by_comp) out.push_back(std::move(rec));
    std::sort(out.begin(), out.end(), [](const MecRecord& a, const MecRecord& b) { return a.states < b.states; });
    return out;
}

namespace {

bool pair_is_sure(const CountTable& counts, const std::vector<std::vector<char>>* known_complete, NodeId s, ActionId a,
                  std::uint64_t required) {
    if (known_complete && (*known_complete)[s][a]) return true;
    return counts[s][a] >= required;
}

}  // namespace

bool is_delta_sure_ec(std::span<const NodeId> states, const ActionGraph& observed, const CountTable& counts,
                      double delta_tp, double p_min, const std::vector<std::vector<char>>* known_complete) {
    if (states.empty()) return false;
    const std::uint64_t required = stats::ec_required_samples(delta_tp, p_min);
    const std::set<NodeId> in(states.begin(), states.end());
    for (NodeId s : states) {
        bool has_staying = false;
        for (ActionId a = 0; a < observed.succ[s].size(); ++a) {
            const auto& post = observed.succ[s][a];
            if (post.empty()) continue;
            const bool stays = std::all_of(post.begin(), post.end(), [&](NodeId t) { return in.count(t) > 0; });
            if (!stays) continue;
            has_staying = true;
            if (!pair_is_sure(counts, known_complete, s, a, required)) return false;
        }
        if (!has_staying) return false;
    }
    return true;
}

std::vector<MecRecord> find_delta_sure_mecs(const ActionGraph& observed, const CountTable& counts, double delta_tp,
                                            double p_min, const std::vector<std::vector<char>>* known_complete) {
    const std::uint64_t required = stats::ec_required_samples(delta_tp, p_min);
    ActionGraph g;
    g.succ = observed.succ;
    g.state_enabled = observed.state_enabled;
    g.action_enabled.resize(observed.size());
    for (NodeId s = 0; s < observed.size(); ++s) {
        g.action_enabled[s].assign(observed.succ[s].size(), 0);
        for (ActionId a = 0; a < observed.succ[s].size(); ++a) {
            g.action_enabled[s][a] =
                observed.enabled(s, a) && pair_is_sure(counts, known_complete, s, a, required) ? 1 : 0;
        }
    }
    auto mecs = mec_decomposition(g);
    for (auto& m : mecs) m.delta_sure = true;
    return mecs;
}

std::optional<ActionCandidate> best_leaving_action(const MecRecord& mec, std::span<const ActionCandidate> candidates) {
    std::optional<ActionCandidate> best;
    auto better = [](const ActionCandidate& a, const ActionCandidate& b) {
        if (a.upper != b.upper) return a.upper > b.upper;
        if (a.lower != b.lower) return a.lower > b.lower;
        if (a.state != b.state) return a.state < b.state;
        return a.label < b.label;
    };
    for (const auto& c : candidates) {
        if (!mec.contains(c.state) || !c.leaves) continue;
        if (!best || better(c, *best)) best = c;
    }
    return best;
}

}  // namespace mppac
