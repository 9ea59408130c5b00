#include "mppac/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mppac::stats {

double tp_inconfidence(double delta_mp, double p_min, std::uint64_t num_state_actions) {
    const double n = static_cast<double>(std::max<std::uint64_t>(num_state_actions, 1));
    return delta_mp * p_min / n;
}

InconfidenceBudget make_budget(double delta_mp, double p_min, std::uint64_t num_state_actions, bool ctmdp) {
    InconfidenceBudget b;
    b.delta_mp = delta_mp;
    const double n = static_cast<double>(std::max<std::uint64_t>(num_state_actions, 1));
    if (ctmdp) {
        std::tie(b.delta_mp1, b.delta_mp2) = split_mp_inconfidence(delta_mp, p_min);
        b.delta_tp = tp_inconfidence(b.delta_mp1, p_min, num_state_actions);
        b.delta_r = b.delta_mp2 / n;
    } else {
        b.delta_mp1 = delta_mp;
        b.delta_mp2 = 0.0;
        b.delta_tp = tp_inconfidence(delta_mp, p_min, num_state_actions);
        b.delta_r = 0.0;
    }
    return b;
}

double tp_width(std::uint64_t count, double delta_tp) {
    if (count == 0) return 1.0;
    if (delta_tp >= 1.0) return 0.0;
    const double w = std::sqrt(std::log(delta_tp) / (-2.0 * static_cast<double>(count)));
    return std::min(w, 1.0);
}

double lower_tp_estimate(std::uint64_t count_sat, std::uint64_t count_total, double width) {
    if (count_total == 0) return 0.0;
    const double freq = static_cast<double>(count_sat) / static_cast<double>(count_total);
    return std::max(0.0, freq - width);
}

std::uint64_t ec_required_samples(double delta_tp, double p_min) {
    if (p_min >= 1.0 || delta_tp >= 1.0) return 1;
    const double raw = std::log(delta_tp) / std::log1p(-p_min);
    // Guard against ln-ratio rounding pushing an exact integer over the edge.
    const double n = std::ceil(raw - 1e-9);
    return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(n));
}

double greybox_miss_probability(double p_min, std::uint64_t count) {
    return std::pow(1.0 - p_min, static_cast<double>(count));
}

namespace {

constexpr double kInvPhi = 0.6180339887498949;

// Golden-section minimisation of a unimodal function on [lo, hi].
template <typename F>
std::pair<double, double> golden_min(F&& f, double lo, double hi, double rel_tol) {
    double a = lo;
    double b = hi;
    double c = b - kInvPhi * (b - a);
    double d = a + kInvPhi * (b - a);
    double fc = f(c);
    double fd = f(d);
    while (std::abs(b - a) > rel_tol * std::max(std::abs(c) + std::abs(d), 1e-12) && std::abs(b - a) > 1e-15) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kInvPhi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kInvPhi * (b - a);
            fd = f(d);
        }
    }
    const double x = 0.5 * (a + b);
    return {x, f(x)};
}

constexpr double kRelTol = 1e-6;

void check_alpha(double alpha_r) {
    if (!(alpha_r > 0.0 && alpha_r < 1.0)) throw DomainError("alpha_r must lie in (0,1)");
}

}  // namespace

// The bound factorises as exp(n * g(u)), so the minimiser does not depend on
// n and the search runs on the per-sample exponent g.
ChernoffTail chernoff_upper_tail(std::uint64_t n, double alpha_r) {
    check_alpha(alpha_r);
    auto g = [alpha_r](double u) { return -std::log1p(u) + u * (1.0 + alpha_r); };
    auto [u, gmin] = golden_min(g, -1.0 + 1e-9, -1e-9, kRelTol);
    return {std::exp(static_cast<double>(n) * gmin), u};
}

ChernoffTail chernoff_lower_tail(std::uint64_t n, double alpha_r) {
    check_alpha(alpha_r);
    auto g = [alpha_r](double u) { return -std::log1p(u) + u * (1.0 - alpha_r); };
    auto [u, gmin] = golden_min(g, 1e-9, 50.0, kRelTol);
    return {std::exp(static_cast<double>(n) * gmin), u};
}

double rate_inconfidence(std::uint64_t n, double alpha_r) {
    return chernoff_upper_tail(n, alpha_r).bound + chernoff_lower_tail(n, alpha_r).bound;
}

std::uint64_t rate_samples(double alpha_r, double delta_r) {
    check_alpha(alpha_r);
    if (!(delta_r > 0.0 && delta_r < 1.0)) throw DomainError("delta_r must lie in (0,1)");
    // Exponents are fixed per alpha; evaluate them once.
    const double g_up = std::log(chernoff_upper_tail(1, alpha_r).bound);
    const double g_lo = std::log(chernoff_lower_tail(1, alpha_r).bound);
    auto bound = [&](std::uint64_t n) {
        const double nd = static_cast<double>(n);
        return std::exp(nd * g_up) + std::exp(nd * g_lo);
    };
    std::uint64_t hi = 1;
    while (bound(hi) > delta_r) hi *= 2;
    std::uint64_t lo = hi / 2;  // bound(lo) > delta or lo == 0
    while (hi - lo > 1) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (bound(mid) <= delta_r) hi = mid;
        else lo = mid;
    }
    return hi;
}

std::optional<double> rate_alpha_for_samples(std::uint64_t n, double delta_r) {
    if (n == 0 || !(delta_r > 0.0)) return std::nullopt;
    constexpr double kMaxAlpha = 0.999;
    if (rate_inconfidence(n, kMaxAlpha) > delta_r) return std::nullopt;
    double lo = 0.0;  // uncertified
    double hi = kMaxAlpha;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (rate_inconfidence(n, mid) <= delta_r) hi = mid;
        else lo = mid;
    }
    return hi;
}

double estimate_rate(std::span<const double> dwell_times) {
    if (dwell_times.empty()) throw DomainError("estimate_rate needs at least one dwell time");
    double sum = 0.0;
    for (double d : dwell_times) {
        if (!(d >= 0.0)) throw DomainError("dwell times must be non-negative");
        sum += d;
    }
    if (!(sum > 0.0)) throw DomainError("dwell times have zero mean");
    return static_cast<double>(dwell_times.size()) / sum;
}

std::pair<double, double> rate_interval(double lambda_hat, double alpha_r) {
    return {lambda_hat * (1.0 - alpha_r), lambda_hat * (1.0 + alpha_r)};
}

std::pair<double, double> split_mp_inconfidence(double delta_mp, double p_min) {
    const double d1 = delta_mp / (p_min + 1.0);
    return {d1, delta_mp - d1};
}

double combined_alpha_hat(double alpha_tp, double eps_tp, double p_min) {
    if (eps_tp >= p_min) throw DomainError("eps_tp must be smaller than p_min");
    return (p_min * alpha_tp + eps_tp) / (p_min - eps_tp);
}

ValueBounds ctmdp_value_bounds(double v, double alpha_r, double r_max) {
    return {v * (1.0 - alpha_r) / (1.0 + alpha_r), v * (1.0 + alpha_r) / (1.0 - alpha_r),
            r_max * 2.0 * alpha_r / (1.0 - alpha_r)};
}

}  // namespace mppac::stats
