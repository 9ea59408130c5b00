#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>

namespace mppac::stats {

/// Raised when a formula is evaluated outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Per-item inconfidences derived from the overall mean-payoff inconfidence.
struct InconfidenceBudget {
    double delta_mp = 0.1;
    double delta_mp1 = 0.1;  ///< transition share (equals delta_mp for an MDP)
    double delta_mp2 = 0.0;  ///< rate share (CTMDP only)
    double delta_tp = 0.0;
    double delta_r = 0.0;
};

/// Multiplicative precision alpha on the mean residence time, with the sample
/// count that certifies it.
struct RatePrecision {
    double alpha_r;
    std::uint64_t n_samples;
};

/// delta_TP = delta_MP * p_min / |{(s,a)}|.
double tp_inconfidence(double delta_mp, double p_min, std::uint64_t num_state_actions);

/// Budget for the current number of discovered state-action pairs.
/// For a CTMDP the overall inconfidence is split so that delta_TP = delta_R.
InconfidenceBudget make_budget(double delta_mp, double p_min, std::uint64_t num_state_actions, bool ctmdp);

/// Hoeffding half-width sqrt(ln(delta_TP) / (-2 count)), clamped to [0,1].
/// A count of zero gives the vacuous width 1.
double tp_width(std::uint64_t count, double delta_tp);

/// max(0, count_sat / count_total - width).
double lower_tp_estimate(std::uint64_t count_sat, std::uint64_t count_total, double width);

/// ceil(ln(delta_TP) / ln(1 - p_min)), at least 1.
std::uint64_t ec_required_samples(double delta_tp, double p_min);

/// (1 - p_min)^count: chance that a successor is still unseen after count samples.
double greybox_miss_probability(double p_min, std::uint64_t count);

/// One-sided Chernoff bound for the sample mean of n exponentials.
struct ChernoffTail {
    double bound;      ///< infimum value
    double minimizer;  ///< u = t / lambda at the infimum
};

/// inf over -1<u<0 of (1+u)^-n exp(u n (1+alpha)): mean overestimates by alpha.
ChernoffTail chernoff_upper_tail(std::uint64_t n, double alpha_r);
/// inf over u>0 of (1+u)^-n exp(u n (1-alpha)): mean underestimates by alpha.
ChernoffTail chernoff_lower_tail(std::uint64_t n, double alpha_r);

/// Sum of both tails: probability that 1/lambda_hat misses 1/lambda by more than alpha.
double rate_inconfidence(std::uint64_t n, double alpha_r);

/// Smallest n with rate_inconfidence(n, alpha) <= delta.
std::uint64_t rate_samples(double alpha_r, double delta_r);

/// Smallest alpha in (0,1) certified by n samples at inconfidence delta, if any.
std::optional<double> rate_alpha_for_samples(std::uint64_t n, double delta_r);

/// 1 / mean(dwell_times).
double estimate_rate(std::span<const double> dwell_times);

/// [lambda_hat (1 - alpha), lambda_hat (1 + alpha)].
std::pair<double, double> rate_interval(double lambda_hat, double alpha_r);

/// delta_MP1 = delta_MP / (p_min + 1), delta_MP2 = delta_MP p_min / (p_min + 1).
std::pair<double, double> split_mp_inconfidence(double delta_mp, double p_min);

/// Combined multiplicative rate error from a rate error and a transition
/// error: (p_min alpha + eps) / (p_min - eps). Diagnostic only.
double combined_alpha_hat(double alpha_tp, double eps_tp, double p_min);

struct ValueBounds {
    double low;
    double high;
    double abs_gap;
};

/// Envelope of a mean payoff v when rates are only known alpha-precisely.
ValueBounds ctmdp_value_bounds(double v, double alpha_r, double r_max);

}  // namespace mppac::stats
