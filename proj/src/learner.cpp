#include "mppac/learner.hpp"

#include "mppac/learn_ctmdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace mppac {

std::uint64_t compute_n_samples(std::uint64_t least_count, std::uint64_t initial, std::uint64_t multiplier) {
    std::uint64_t n = std::max<std::uint64_t>(initial, 1);
    const std::uint64_t mult = std::max<std::uint64_t>(multiplier, 2);
    while (n <= least_count) n *= mult;
    return n;
}

bool looping(std::span<const NodeId> path, NodeId s, const PartialModel& pm, double delta_tp, double p_min,
             LearnMode mode) {
    ActionGraph g = pm.observed_graph();
    g.state_enabled.assign(g.size(), 0);
    for (NodeId v : path) {
        if (!PartialModel::is_terminal(v)) g.state_enabled[v] = 1;
    }
    if (PartialModel::is_terminal(s) || !g.state_enabled[s]) return false;
    const auto counts = pm.count_table();
    std::vector<std::vector<char>> complete;
    if (mode == LearnMode::Greybox) complete = pm.complete_table();
    const auto* known = mode == LearnMode::Greybox ? &complete : nullptr;
    for (const auto& rec : find_delta_sure_mecs(g, counts, delta_tp, p_min, known)) {
        if (rec.contains(s)) return is_delta_sure_ec(rec.states, g, counts, delta_tp, p_min, known);
    }
    return false;
}

std::vector<ActionCandidate> leaving_candidates(const PartialModel& pm, const MecRecord& m, double delta_tp,
                                                LearnMode mode) {
    std::vector<ActionCandidate> out;
    const auto stay = pm.scaled_gain(m);
    for (NodeId s : m.states) {
        const auto& acts = pm.actions(s);
        for (ActionId a = 0; a < acts.size(); ++a) {
            if (m.has_action(s, a)) continue;
            const auto b = pm.action_bounds(s, a, delta_tp, mode);
            out.push_back({s, a, acts[a].label, b.upper, b.lower, true});
        }
        out.push_back({s, kStayAction, "stay", stay.upper, stay.lower, true});
    }
    return out;
}

Learner::Learner(SampleOracle& oracle, LearnerConfig config)
    : oracle_(oracle), cfg_(std::move(config)), rng_(derive_seed(cfg_.seed, 1)), start_(std::chrono::steady_clock::now()) {
    init_ = node(oracle_.initial_state());
}

stats::InconfidenceBudget Learner::budget() const {
    return stats::make_budget(cfg_.delta_mp, oracle_.p_min(), pm_.pair_count(), is_ctmdp());
}

double Learner::delta_tp() const { return budget().delta_tp; }

double Learner::target_width() const {
    if (cfg_.precision == PrecisionMode::Absolute || pm_.r_max() <= 0.0) return 2.0 * cfg_.epsilon_mp;
    return 2.0 * cfg_.epsilon_mp / pm_.r_max();
}

double Learner::certified_inconfidence() const {
    double d = cfg_.delta_mp;
    if (cfg_.mode != LearnMode::BlackboxGreyUpdates) return d;
    for (NodeId s = PartialModel::kFirstState; s < pm_.node_count(); ++s) {
        for (const auto& p : pm_.actions(s)) {
            if (p.count > 0) d += stats::greybox_miss_probability(oracle_.p_min(), p.count);
        }
    }
    return d;
}

double Learner::now() const {
    if (cfg_.clock == ClockKind::Steps) return static_cast<double>(oracle_.steps_taken()) / 1e6;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
}

bool Learner::out_of_time() const { return now() >= cfg_.timeout_s; }

NodeId Learner::node(StateId global) {
    if (auto found = pm_.find(global)) return *found;
    const std::size_t n = oracle_.action_count(global);
    std::vector<std::string> labels;
    std::vector<std::size_t> posts;
    labels.reserve(n);
    for (ActionId a = 0; a < n; ++a) {
        labels.push_back(oracle_.action_label(global, a));
        if (cfg_.mode == LearnMode::Greybox) posts.push_back(oracle_.successor_count(global, a));
    }
    ++version_;
    return pm_.add_state(global, oracle_.reward(global), std::move(labels), std::move(posts));
}

NodeId Learner::step(NodeId s, ActionId a) {
    const auto sample = oracle_.sample_step(pm_.global_id(s), a);
    const NodeId t = node(sample.successor);
    if (pm_.pair(s, a).successor_count(t) == 0) ++version_;
    pm_.record(s, a, t, sample.dwell);
    if (pm_.pair(s, a).count == stats::ec_required_samples(delta_tp(), oracle_.p_min())) ++version_;
    return t;
}

ActionId Learner::choose_action(NodeId s) {
    struct Option {
        ActionId action;
        BoundPair bounds;
    };
    std::vector<Option> opts;
    const double dtp = delta_tp();
    const auto& acts = pm_.actions(s);
    for (ActionId a = 0; a < acts.size(); ++a) opts.push_back({a, pm_.action_bounds(s, a, dtp, cfg_.mode)});
    if (pm_.mec_of[s] >= 0) opts.push_back({kStayAction, pm_.scaled_gain(pm_.mecs[pm_.mec_of[s]])});

    constexpr double kTie = 1e-12;
    double best_u = -1.0;
    for (const auto& o : opts) best_u = std::max(best_u, o.bounds.upper);
    double best_l = -1.0;
    for (const auto& o : opts) {
        if (o.bounds.upper >= best_u - kTie) best_l = std::max(best_l, o.bounds.lower);
    }
    std::vector<ActionId> pick;
    for (const auto& o : opts) {
        if (o.bounds.upper >= best_u - kTie && o.bounds.lower >= best_l - kTie) pick.push_back(o.action);
    }
    return pick[rng_.below(pick.size())];
}

ActionCandidate Learner::choose_leaving(const MecRecord& m, NodeId s) {
    // Uniform among the leaving actions with maximal (U, L); stay counts once, at s.
    auto cands = leaving_candidates(pm_, m, delta_tp(), cfg_.mode);
    std::erase_if(cands, [s](const ActionCandidate& c) { return c.action == kStayAction && c.state != s; });
    constexpr double kTie = 1e-12;
    double best_u = -1.0;
    for (const auto& c : cands) best_u = std::max(best_u, c.upper);
    double best_l = -1.0;
    for (const auto& c : cands) {
        if (c.upper >= best_u - kTie) best_l = std::max(best_l, c.lower);
    }
    std::erase_if(cands, [&](const ActionCandidate& c) { return c.upper < best_u - kTie || c.lower < best_l - kTie; });
    return cands[rng_.below(cands.size())];
}

NodeId Learner::take_stay(const MecRecord& m) {
    const auto d = pm_.stay_of(m);
    const double x = rng_.uniform();
    if (x < d.plus) return PartialModel::kPlus;
    if (x < d.plus + d.minus) return PartialModel::kMinus;
    return PartialModel::kUnknown;
}

void Learner::refresh_mecs() {
    if (mec_version_ == version_) return;
    std::vector<std::vector<char>> complete;
    if (cfg_.mode == LearnMode::Greybox) complete = pm_.complete_table();
    pm_.set_mecs(find_delta_sure_mecs(pm_.observed_graph(), pm_.count_table(), delta_tp(), oracle_.p_min(),
                                      cfg_.mode == LearnMode::Greybox ? &complete : nullptr));
    mec_version_ = version_;
}

EpisodeResult Learner::simulate_episode() {
    EpisodeResult r;
    std::unordered_map<NodeId, unsigned> appear;
    std::unordered_map<NodeId, std::pair<std::uint64_t, std::size_t>> failed;
    std::vector<NodeId> visited;
    NodeId s = init_;
    std::uint64_t steps = 0;
    const unsigned k = std::max(2u, cfg_.revisit_threshold);
    while (true) {
        r.path.push_back(s);
        if (PartialModel::is_terminal(s)) break;
        if ((cfg_.max_episode_steps && steps >= cfg_.max_episode_steps) ||
            (steps > 0 && steps % 1024 == 0 && out_of_time())) {
            r.aborted = true;
            break;
        }
        unsigned& seen = appear[s];
        if (seen == 0) visited.push_back(s);
        if (++seen >= k) {
            const auto key = std::make_pair(version_, appear.size());
            auto it = failed.find(s);
            if (it == failed.end() || it->second != key) {
                if (looping(visited, s, pm_, delta_tp(), oracle_.p_min(), cfg_.mode)) refresh_mecs();
                else failed[s] = key;
            }
            if (pm_.mec_of[s] >= 0) {
                const int idx = pm_.mec_of[s];
                const auto& m = pm_.mecs[idx];
                const auto best = choose_leaving(m, s);
                if (best.state != s) r.path.push_back(best.state);
                if (best.action == kStayAction) {
                    r.stay_mec = idx;
                    r.stay_state = best.state;
                    s = take_stay(m);
                } else {
                    s = step(best.state, best.action);
                    ++steps;
                }
                continue;
            }
        }
        const ActionId a = choose_action(s);
        if (a == kStayAction) {
            r.stay_mec = pm_.mec_of[s];
            r.stay_state = s;
            s = take_stay(pm_.mecs[r.stay_mec]);
            continue;
        }
        s = step(s, a);
        ++steps;
    }
    return r;
}

bool Learner::global_update() {
    const double dtp = delta_tp();
    std::vector<double> nl = pm_.L;
    std::vector<double> nu = pm_.U;
    for (NodeId s = PartialModel::kFirstState; s < pm_.node_count(); ++s) {
        double bl = 0.0;
        double bu = 0.0;
        const auto& acts = pm_.actions(s);
        for (ActionId a = 0; a < acts.size(); ++a) {
            const auto b = pm_.action_bounds(s, a, dtp, cfg_.mode);
            bl = std::max(bl, b.lower);
            bu = std::max(bu, b.upper);
        }
        if (pm_.mec_of[s] >= 0) {
            const auto g = pm_.scaled_gain(pm_.mecs[pm_.mec_of[s]]);
            bl = std::max(bl, g.lower);
            bu = std::max(bu, g.upper);
        }
        nl[s] = bl;
        nu[s] = bu;
    }
    bool changed = false;
    for (NodeId s = 0; s < nl.size(); ++s) {
        if (std::abs(nl[s] - pm_.L[s]) > cfg_.vi_tolerance || std::abs(nu[s] - pm_.U[s]) > cfg_.vi_tolerance)
            changed = true;
    }
    pm_.L = std::move(nl);
    pm_.U = std::move(nu);
    return changed;
}

void Learner::deflate(const MecRecord& m) {
    const auto cands = leaving_candidates(pm_, m, delta_tp(), cfg_.mode);
    const auto best = best_leaving_action(m, cands);
    if (!best) return;
    for (NodeId s : m.states) pm_.U[s] = std::min(pm_.U[s], best->upper);
}

void Learner::solve_reachability() {
    pm_.reset_bounds();
    for (std::size_t sweep = 0; sweep < cfg_.vi_max_sweeps; ++sweep) {
        const auto before_u = pm_.U;
        bool changed = global_update();
        for (const auto& m : pm_.mecs) deflate(m);
        for (NodeId s = 0; s < before_u.size() && !changed; ++s) {
            if (std::abs(pm_.U[s] - before_u[s]) > cfg_.vi_tolerance) changed = true;
        }
        if (!changed) break;
    }
}

bool Learner::simulate_mec(const MecRecord& m, std::uint64_t n_samples, NodeId start) {
    std::uint64_t transitions = 0;
    for (const auto& [s, acts] : m.actions) {
        for (ActionId a : acts) transitions += pm_.pair(s, a).successors.size();
    }
    const std::uint64_t total = n_samples * std::max<std::uint64_t>(transitions, 1);
    NodeId s = m.contains(start) ? start : m.states.front();
    for (std::uint64_t i = 0; i < total; ++i) {
        if (i % 4096 == 4095 && out_of_time()) return true;
        const auto& acts = m.actions.at(s);
        const ActionId a = acts[rng_.below(acts.size())];
        const NodeId t = step(s, a);
        if (!m.contains(t)) return false;
        s = t;
    }
    return true;
}

MecGain Learner::evaluate_mec(const MecRecord& m, double beta) {
    return mec_value_iteration(interval_mec(pm_, m, delta_tp()), beta, cfg_.aperiodicity, cfg_.mec_vi_max_iterations);
}

BoundPair Learner::update_mec_value(int mec_index, NodeId start) {
    const MecRecord m = pm_.mecs[mec_index];
    const auto g0 = pm_.scaled_gain(m);
    const double beta = std::max(1e-9, (g0.upper - g0.lower) / 2.0);
    std::uint64_t least = std::numeric_limits<std::uint64_t>::max();
    for (const auto& [s, acts] : m.actions) {
        for (ActionId a : acts) least = std::min(least, pm_.pair(s, a).count);
    }
    const std::uint64_t n = compute_n_samples(least, cfg_.initial_mec_samples, cfg_.mec_sample_multiplier);
    if (!simulate_mec(m, n, start)) {
        refresh_mecs();
        return g0;
    }
    const auto gain = evaluate_mec(m, beta);
    auto& rec = pm_.mecs[mec_index];
    rec.sample_budget = n;
    const double r = pm_.r_max();
    rec.gain_lower = std::max(rec.gain_lower, gain.lower * r);
    rec.gain_upper = std::min(rec.gain_upper, gain.upper * r);
    if (rec.gain_lower > rec.gain_upper) rec.gain_lower = rec.gain_upper;
    return pm_.scaled_gain(rec);
}

BoundsReport Learner::run() {
    BoundsReport rep;
    std::uint64_t episodes = 0;
    while (true) {
        const std::uint64_t before = episodes;
        for (std::uint64_t i = 0; i < cfg_.episodes_per_round; ++i) {
            if (out_of_time()) {
                rep.timed_out = true;
                break;
            }
            const auto ep = simulate_episode();
            ++episodes;
            const NodeId last = ep.path.back();
            if (ep.stay_mec >= 0 && (last == PartialModel::kPlus || last == PartialModel::kUnknown)) {
                const auto g = pm_.scaled_gain(pm_.mecs[ep.stay_mec]);
                if (g.upper - g.lower > cfg_.mec_refine_fraction * target_width())
                    update_mec_value(ep.stay_mec, ep.stay_state);
            }
        }
        refresh_mecs();
        solve_reachability();
        ++rep.rounds;

        TraceRow row{now(), episodes, pm_.L[init_], pm_.U[init_], pm_.r_max(), certified_inconfidence()};
        if (!rep.trace.empty()) row.seconds = std::max(row.seconds, rep.trace.back().seconds + 1e-6);
        if (rep.trace.empty() || episodes > before) rep.trace.push_back(row);
        else rep.trace.back() = TraceRow{rep.trace.back().seconds, episodes, row.lower, row.upper, row.r_max,
                                         row.inconfidence};

        const bool done = !cfg_.anytime && row.upper - row.lower < target_width();
        rep.converged = row.upper - row.lower < target_width();
        bool stop = done || rep.timed_out || (cfg_.max_rounds && rep.rounds >= cfg_.max_rounds);
        if (cfg_.on_round && !cfg_.on_round(row)) stop = true;
        if (stop) break;
    }
    rep.r_max = pm_.r_max();
    rep.lower_mp = pm_.L[init_] * rep.r_max;
    rep.upper_mp = pm_.U[init_] * rep.r_max;
    rep.certified_inconfidence = certified_inconfidence();
    rep.episodes = episodes;
    rep.steps = oracle_.steps_taken();
    return rep;
}

BoundsReport on_demand_bvi(SampleOracle& oracle, const LearnerConfig& config) {
    if (oracle.kind() == ModelKind::Ctmdp) {
        CtmdpLearner learner(oracle, config);
        return learner.run();
    }
    Learner learner(oracle, config);
    return learner.run();
}

}  // namespace mppac
