#include "mppac/model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace mppac {

std::string_view to_string(ModelKind kind) {
    return kind == ModelKind::Mdp ? "mdp" : "ctmdp";
}

double ActionRow::total_weight() const {
    double sum = 0.0;
    for (const auto& tr : successors) sum += tr.weight;
    return sum;
}

ActionId ExplicitModel::find_action(StateId s, std::string_view label) const {
    if (s >= state_count()) throw ModelError("unknown state " + std::to_string(s));
    const auto& acts = rows[s];
    for (ActionId a = 0; a < acts.size(); ++a) {
        if (acts[a].label == label) return a;
    }
    throw ModelError("unknown action '" + std::string(label) + "' for state " + std::to_string(s));
}

double ExplicitModel::exit_rate(StateId s, ActionId a) const {
    return kind == ModelKind::Ctmdp ? rows[s][a].total_weight() : 1.0;
}

double ExplicitModel::probability(StateId s, ActionId a, StateId t) const {
    const auto& r = rows[s][a];
    const double total = kind == ModelKind::Ctmdp ? r.total_weight() : 1.0;
    double w = 0.0;
    for (const auto& tr : r.successors) {
        if (tr.target == t) w += tr.weight;
    }
    return w / total;
}

double ExplicitModel::max_reward() const {
    double m = 0.0;
    for (double r : reward) m = std::max(m, r);
    return m;
}

namespace {

std::string pair_name(StateId s, const std::string& label) {
    return "(" + std::to_string(s) + "," + label + ")";
}

std::string fmt_double(double v) {
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

}  // namespace

void ExplicitModel::validate() const {
    const std::size_t n = state_count();
    if (n == 0) throw ModelError("model has no states");
    if (rows.size() != n) throw ModelError("reward/row table size mismatch");
    if (init >= n) throw ModelError("init state " + std::to_string(init) + " out of range");
    if (!(p_min > 0.0 && p_min <= 1.0)) throw ModelError("pmin must lie in (0,1], got " + fmt_double(p_min));
    for (StateId s = 0; s < n; ++s) {
        if (!(reward[s] >= 0.0) || !std::isfinite(reward[s]))
            throw ModelError("negative or non-finite reward at state " + std::to_string(s));
        if (rows[s].empty()) throw ModelError("state " + std::to_string(s) + " has no actions");
        for (const auto& row : rows[s]) {
            const std::string where = pair_name(s, row.label);
            if (row.successors.empty()) throw ModelError("empty row at " + where);
            for (const auto& tr : row.successors) {
                if (tr.target >= n)
                    throw ModelError("dangling successor " + std::to_string(tr.target) + " at " + where);
                if (!(tr.weight >= 0.0) || !std::isfinite(tr.weight))
                    throw ModelError("negative or non-finite weight at " + where);
            }
            const double total = row.total_weight();
            if (kind == ModelKind::Mdp) {
                if (std::abs(total - 1.0) > kRowSumTolerance)
                    throw ModelError("row sum " + fmt_double(total) + " ≠ 1 at " + where);
            } else if (!(total > 0.0)) {
                throw ModelError("zero total rate at " + where);
            }
            for (const auto& tr : row.successors) {
                if (tr.weight == 0.0) continue;
                const double p = tr.weight / (kind == ModelKind::Mdp ? 1.0 : total);
                if (p < p_min - 1e-12)
                    throw ModelError("probability " + fmt_double(p) + " below pmin " + fmt_double(p_min) +
                                     " at " + where);
            }
        }
    }
}

namespace {

struct Parser {
    std::optional<ModelKind> kind;
    std::optional<std::size_t> states;
    std::optional<StateId> init;
    std::optional<double> pmin;
    std::map<StateId, double> rewards;
    // (state, label) -> row, in first-appearance order per state
    std::map<StateId, std::vector<ActionRow>> rows;
    std::size_t line_no = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ModelError("line " + std::to_string(line_no) + ": " + msg);
    }

    double number(const std::string& tok) const {
        double v = 0.0;
        const char* b = tok.data();
        const char* e = tok.data() + tok.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) fail("expected a number, got '" + tok + "'");
        return v;
    }

    std::uint64_t index(const std::string& tok) const {
        std::uint64_t v = 0;
        const char* b = tok.data();
        const char* e = tok.data() + tok.size();
        auto [p, ec] = std::from_chars(b, e, v);
        if (ec != std::errc{} || p != e) fail("expected a non-negative integer, got '" + tok + "'");
        if (v > 0x7fffffffULL) fail("index too large: " + tok);
        return v;
    }

    void expect_args(const std::vector<std::string>& toks, std::size_t n) const {
        if (toks.size() != n)
            fail("'" + toks[0] + "' expects " + std::to_string(n - 1) + " argument(s), got " +
                 std::to_string(toks.size() - 1));
    }

    void line(const std::vector<std::string>& toks) {
        const std::string& d = toks[0];
        if (!kind) {
            if (toks.size() == 1 && d == "mdp") { kind = ModelKind::Mdp; return; }
            if (toks.size() == 1 && d == "ctmdp") { kind = ModelKind::Ctmdp; return; }
            fail("first directive must be 'mdp' or 'ctmdp'");
        }
        if (d == "states") {
            expect_args(toks, 2);
            if (states) fail("duplicate 'states'");
            const auto n = index(toks[1]);
            if (n == 0) fail("'states' must be positive");
            states = n;
        } else if (d == "init") {
            expect_args(toks, 2);
            if (init) fail("duplicate 'init'");
            init = static_cast<StateId>(index(toks[1]));
        } else if (d == "pmin") {
            expect_args(toks, 2);
            if (pmin) fail("duplicate 'pmin'");
            pmin = number(toks[1]);
        } else if (d == "reward") {
            expect_args(toks, 3);
            const auto s = static_cast<StateId>(index(toks[1]));
            if (rewards.count(s)) fail("duplicate reward for state " + toks[1]);
            rewards[s] = number(toks[2]);
        } else if (d == "t") {
            expect_args(toks, 5);
            const auto s = static_cast<StateId>(index(toks[1]));
            const std::string& label = toks[2];
            const auto t = static_cast<StateId>(index(toks[3]));
            const double w = number(toks[4]);
            auto& acts = rows[s];
            auto it = std::find_if(acts.begin(), acts.end(), [&](const ActionRow& r) { return r.label == label; });
            if (it == acts.end()) {
                acts.push_back(ActionRow{label, {}});
                it = std::prev(acts.end());
            }
            for (const auto& tr : it->successors) {
                if (tr.target == t) fail("duplicate transition " + pair_name(s, label) + " -> " + toks[3]);
            }
            it->successors.push_back(Transition{t, w});
        } else if (d == "mdp" || d == "ctmdp") {
            fail("model kind declared twice");
        } else {
            fail("unknown directive '" + d + "'");
        }
    }

    ExplicitModel finish() const {
        if (!kind) throw ModelError("empty model: missing 'mdp' or 'ctmdp' header");
        if (!states) throw ModelError("missing 'states' directive");
        if (!init) throw ModelError("missing 'init' directive");
        if (!pmin) throw ModelError("missing 'pmin' directive");
        ExplicitModel m;
        m.kind = *kind;
        m.init = *init;
        m.p_min = *pmin;
        m.reward.assign(*states, 0.0);
        m.rows.assign(*states, {});
        for (const auto& [s, r] : rewards) {
            if (s >= *states) throw ModelError("reward for dangling state " + std::to_string(s));
            m.reward[s] = r;
        }
        for (const auto& [s, acts] : rows) {
            if (s >= *states) throw ModelError("transition from dangling state " + std::to_string(s));
            m.rows[s] = acts;
        }
        m.validate();
        return m;
    }
};

}  // namespace

ExplicitModel parse_model(std::istream& in) {
    Parser p;
    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line_no;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> toks;
        for (std::string tok; ls >> tok;) toks.push_back(tok);
        if (toks.empty()) continue;
        p.line(toks);
    }
    return p.finish();
}

ExplicitModel parse_model_string(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_model(in);
}

ExplicitModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ModelError("cannot open model file '" + path + "'");
    return parse_model(in);
}

std::string format_model(const ExplicitModel& m) {
    std::ostringstream os;
    os.precision(17);
    os << to_string(m.kind) << "\n";
    os << "states " << m.state_count() << "\n";
    os << "init " << m.init << "\n";
    os << "pmin " << m.p_min << "\n";
    for (StateId s = 0; s < m.state_count(); ++s) {
        if (m.reward[s] != 0.0) os << "reward " << s << " " << m.reward[s] << "\n";
    }
    for (StateId s = 0; s < m.state_count(); ++s) {
        for (const auto& row : m.rows[s]) {
            for (const auto& tr : row.successors) {
                os << "t " << s << " " << row.label << " " << tr.target << " " << tr.weight << "\n";
            }
        }
    }
    return os.str();
}

ExplicitModel embedded_mdp(const ExplicitModel& m) {
    if (m.kind != ModelKind::Ctmdp) throw ModelError("embedded_mdp expects a CTMDP");
    ExplicitModel out = m;
    out.kind = ModelKind::Mdp;
    for (auto& acts : out.rows) {
        for (auto& row : acts) {
            const double lambda = row.total_weight();
            for (auto& tr : row.successors) tr.weight /= lambda;
        }
    }
    out.validate();
    return out;
}

}  // namespace mppac
