#include "mppac/learner.hpp"
#include "mppac/model.hpp"
#include "mppac/oracle.hpp"
#include "mppac/report.hpp"
#include "mppac/stats.hpp"
#include "mppac/whitebox.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

using namespace mppac;

namespace {

struct RunOptions {
    std::string model;
    std::string kind;
    std::string mode = "blackbox";
    std::optional<std::uint64_t> seed;
    std::string seeds;
    unsigned repeat = 1;
    std::string csv;
    std::string svg;
    bool absolute = false;
    std::string clock = "wall";
    std::optional<double> reference;
    LearnerConfig cfg;
};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    std::vector<std::uint64_t> out;
    if (auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = std::stoull(text.substr(0, dots));
        const auto hi = std::stoull(text.substr(dots + 2));
        if (hi < lo) throw std::invalid_argument("empty seed range " + text);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
        return out;
    }
    std::size_t pos = 0;
    while (pos < text.size()) {
        const auto comma = text.find(',', pos);
        out.push_back(std::stoull(text.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

std::string with_seed(const std::string& path, std::uint64_t seed, bool many) {
    if (!many || path.empty()) return path;
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of('/');
    const std::string tag = "_seed" + std::to_string(seed);
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag;
    return path.substr(0, dot) + tag + path.substr(dot);
}

LearnMode parse_mode(const std::string& m) {
    if (m == "blackbox") return LearnMode::Blackbox;
    if (m == "blackbox-grey-updates") return LearnMode::BlackboxGreyUpdates;
    if (m == "greybox") return LearnMode::Greybox;
    throw std::invalid_argument("unknown mode " + m);
}

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

int run_command(RunOptions opt) {
    const ExplicitModel model = load_model(opt.model);
    if (!opt.kind.empty() && opt.kind != std::string(to_string(model.kind)))
        throw std::invalid_argument("--kind " + opt.kind + " does not match the model header");

    opt.cfg.mode = parse_mode(opt.mode);
    opt.cfg.precision = opt.absolute ? PrecisionMode::Absolute : PrecisionMode::Relative;
    opt.cfg.clock = opt.clock == "steps" ? ClockKind::Steps : ClockKind::Wall;

    std::vector<std::uint64_t> seeds;
    if (!opt.seeds.empty()) seeds = parse_seeds(opt.seeds);
    else {
        std::uint64_t base = 1;
        if (opt.seed) base = *opt.seed;
        else if (const char* env = std::getenv("MPPAC_SEED")) base = std::stoull(env);
        for (unsigned i = 0; i < std::max(1u, opt.repeat); ++i) seeds.push_back(base + i);
    }
    const bool many = seeds.size() > 1;

    const InfoLevel level = opt.cfg.mode == LearnMode::Greybox ? InfoLevel::Greybox : InfoLevel::Blackbox;
    std::vector<BoundsReport> reports(seeds.size());
    std::mutex io;
    auto one = [&](std::size_t i) {
        LearnerConfig cfg = opt.cfg;
        cfg.seed = seeds[i];
        if (cfg.anytime && !many) {
            cfg.on_round = [&io](const TraceRow& r) {
                std::lock_guard lock(io);
                std::cout << "round t=" << fmt("%.3f", r.seconds) << " episodes=" << r.episodes << " ["
                          << fmt("%.6g", r.lower * r.r_max) << ", " << fmt("%.6g", r.upper * r.r_max) << "]\n"
                          << std::flush;
                return true;
            };
        }
        SampleOracle oracle(model, level, derive_seed(seeds[i], 0));
        reports[i] = on_demand_bvi(oracle, cfg);
        if (!opt.csv.empty()) write_file(with_seed(opt.csv, seeds[i], many), trace_csv(reports[i].trace));
        if (!opt.svg.empty())
            write_file(with_seed(opt.svg, seeds[i], many),
                       trace_svg(reports[i].trace, opt.model + " (seed " + std::to_string(seeds[i]) + ")"));
    };
    if (many) {
        std::vector<std::thread> pool;
        std::vector<std::exception_ptr> errors(seeds.size());
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            pool.emplace_back([&, i] {
                try {
                    one(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            });
        }
        for (auto& t : pool) t.join();
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }
    } else {
        one(0);
    }

    std::optional<double> reference = opt.reference;
    if (!reference && many) {
        try {
            reference = exact_mean_payoff(model);
        } catch (const std::exception&) {
        }
    }
    std::size_t covered = 0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const auto& r = reports[i];
        std::cout << "seed " << seeds[i] << ": interval [" << fmt("%.6f", r.lower_mp) << ", "
                  << fmt("%.6f", r.upper_mp) << "] width " << fmt("%.6f", r.upper_mp - r.lower_mp)
                  << " inconfidence " << fmt("%.6g", r.certified_inconfidence) << " episodes " << r.episodes
                  << " steps " << r.steps << (r.converged ? " converged" : "") << (r.timed_out ? " timeout" : "")
                  << '\n';
        if (reference && r.lower_mp <= *reference + 1e-9 && *reference <= r.upper_mp + 1e-9) ++covered;
    }
    if (many) {
        std::cout << "summary: " << seeds.size() << " runs";
        if (reference)
            std::cout << ", coverage " << covered << "/" << seeds.size() << " (reference value "
                      << fmt("%.6f", *reference) << ")";
        std::cout << '\n';
    }
    return 0;
}

int rates_table() {
    const std::vector<double> alphas{0.03, 0.05, 0.10, 0.20};
    const std::vector<std::pair<double, const char*>> deltas{
        {0.1, "10%"}, {0.05, "5%"}, {1e-4, "0.01%"}, {1e-7, "0.00001%"}};
    std::printf("%-8s", "alpha");
    for (const auto& [d, name] : deltas) std::printf("%12s", name);
    std::printf("\n");
    for (double a : alphas) {
        std::printf("%-8s", (fmt("%.0f", a * 100) + "%").c_str());
        for (const auto& [d, name] : deltas) std::printf("%12llu", static_cast<unsigned long long>(stats::rate_samples(a, d)));
        std::printf("\n");
    }
    return 0;
}

int solve_whitebox(const std::string& path, bool enumerate) {
    const ExplicitModel model = load_model(path);
    const double v = exact_mean_payoff(model);
    std::cout << "value " << fmt("%.9f", v) << '\n';
    if (enumerate) std::cout << "enumeration " << fmt("%.9f", enumerate_policies_gain(model)) << '\n';
    return 0;
}

int lint(const std::string& path) {
    const ExplicitModel model = load_model(path);
    std::vector<char> seen(model.state_count(), 0);
    std::vector<StateId> stack{model.init};
    seen[model.init] = 1;
    double smallest = 1.0;
    while (!stack.empty()) {
        const StateId s = stack.back();
        stack.pop_back();
        for (ActionId a = 0; a < model.action_count(s); ++a) {
            for (const auto& tr : model.rows[s][a].successors) {
                if (tr.weight <= 0.0) continue;
                smallest = std::min(smallest, tr.weight / model.rows[s][a].total_weight());
                if (!seen[tr.target]) {
                    seen[tr.target] = 1;
                    stack.push_back(tr.target);
                }
            }
        }
    }
    std::size_t reachable = 0;
    for (char c : seen) reachable += c;
    std::cout << "OK, " << model.state_count() << " states\n";
    std::cout << "kind " << to_string(model.kind) << ", pmin " << model.p_min << ", smallest reachable probability "
              << smallest << '\n';
    std::cout << "reachable states " << reachable << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PAC bounds on the maximal mean payoff of blackbox and greybox MDPs and CTMDPs"};
    app.require_subcommand(1);

    RunOptions opt;
    auto* run = app.add_subcommand("run", "learn a mean-payoff interval by simulation");
    run->add_option("--model", opt.model, "model file")->required();
    run->add_option("--kind", opt.kind, "mdp or ctmdp (checked against the file header)")
        ->check(CLI::IsMember({"mdp", "ctmdp"}));
    run->add_option("--mode", opt.mode, "blackbox | blackbox-grey-updates | greybox")
        ->check(CLI::IsMember({"blackbox", "blackbox-grey-updates", "greybox"}));
    run->add_option("--epsilon", opt.cfg.epsilon_mp, "half-width target")->check(CLI::PositiveNumber);
    run->add_option("--delta", opt.cfg.delta_mp, "inconfidence")->check(CLI::Range(1e-300, 1.0));
    run->add_option("--revisit-threshold", opt.cfg.revisit_threshold, "k")->check(CLI::Range(2u, 1000000u));
    run->add_option("--episodes-per-round", opt.cfg.episodes_per_round, "n")->check(CLI::PositiveNumber);
    run->add_option("--timeout-s", opt.cfg.timeout_s, "time budget in seconds");
    run->add_option("--seed", opt.seed, "base seed (default: $MPPAC_SEED or 1)");
    run->add_option("--repeat", opt.repeat, "independent runs with consecutive seeds, in parallel");
    run->add_option("--seeds", opt.seeds, "explicit seeds, e.g. 1..20 or 3,5,8");
    run->add_option("--csv", opt.csv, "trace output (time_s,episodes,lower,upper)");
    run->add_option("--svg", opt.svg, "convergence plot output");
    run->add_flag("--anytime", opt.cfg.anytime, "ignore the width test and stream bounds until the timeout");
    run->add_flag("--exact-mec-bounds", opt.cfg.exact_mec_bounds, "CTMDP: exact rate sweep instead of heuristic");
    run->add_flag("--absolute", opt.absolute, "absolute instead of relative precision");
    run->add_option("--clock", opt.clock, "wall | steps (steps gives reproducible traces)")
        ->check(CLI::IsMember({"wall", "steps"}));
    run->add_option("--max-rounds", opt.cfg.max_rounds, "stop after this many rounds (0 = unlimited)");
    run->add_option("--max-episode-steps", opt.cfg.max_episode_steps, "cap on steps per episode (0 = off)");
    run->add_option("--reference", opt.reference, "known value used for the coverage count");

    std::string path;
    bool enumerate = false;
    auto* table = app.add_subcommand("rates-table", "sample counts for alpha-precise rate estimates");
    auto* solve = app.add_subcommand("solve-whitebox", "exact maximal mean payoff of a model file");
    solve->add_option("--model", path, "model file")->required();
    solve->add_flag("--enumerate", enumerate, "also brute-force all positional policies");
    auto* lint_cmd = app.add_subcommand("lint", "parse and validate a model file");
    lint_cmd->add_option("model", path, "model file")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return run_command(opt);
        if (*table) return rates_table();
        if (*solve) return solve_whitebox(path, enumerate);
        if (*lint_cmd) return lint(path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
