#pragma once
// Closed-form capacity and throughput predictions for every scheduling
// scheme: homogeneous/heterogeneous threshold scheduling, per-user QoS
// thresholds, equal time sharing, two-user capture, and the binned
// (mini-slot) enhancement.
//
// Every capacity formula can run on either rate backend (see
// point_process.hpp): RateModel::exact keeps the per-user exceedance
// probabilities exact so that formula-vs-simulation gaps isolate the
// formula's own structure, and is the default; RateModel::evt uses the
// extreme-value tail rates themselves, quantifying how much of any
// formula-vs-simulation gap the tail approximation contributes.
// Asymptotically vanishing o(a_K) corrections are dropped throughout.

#include "oppsim/point_process.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace oppsim::an {

enum class Scheme { homogeneous, heterogeneous, qos, equal_share, capture, enhanced };

enum class RateModel { exact, evt };

struct AnalyticReport {
  Scheme scheme;
  double expected_capacity; // capacity units per slot, >= 0
  double p_idle;
  double p_collision;
  double p_utilized; // the three sum to 1 (construction guarantees it)
  std::optional<double> expected_delay_minislots;
  std::vector<double> thresholds; // size 1 (common u) or K (per-user)
};

// Homogeneous population at the threshold where k of K users exceed on
// average:  C = k e^(-k) (u_k + sigma a_K),  p_utilized = k e^(-k),
// p_idle = e^(-k), p_collision = 1 - e^(-k)(1+k).
AnalyticReport capacity_homogeneous(std::uint64_t K, double k, double mu, double sigma);

// Heterogeneous population at a common threshold u:
//   C = (L/K) e^(-L/K) sum_i (L_i/L) (u + sigma_i a_K),   L = Lambda_T.
AnalyticReport capacity_heterogeneous(double u, const std::vector<pp::UserProfile>& profiles,
                                      RateModel model = RateModel::exact);

// Per-user QoS thresholds u_{p_i} (Gumbel return level at each profile's
// qos_p), rates evaluated at each user's own threshold:
//   C = (L/K) e^(-L/K) sum_i (L_i/L) (u_{p_i} + sigma_i a_K).
AnalyticReport capacity_qos(const std::vector<pp::UserProfile>& profiles,
                            RateModel model = RateModel::exact);

// Equal time sharing: capacity_qos with every qos_p = 1/K.
AnalyticReport capacity_equal_share(const std::vector<pp::UserProfile>& profiles,
                                    RateModel model = RateModel::exact);

// General single-winner assembly at already-resolved thresholds (size 1 for a
// common threshold, size K for per-user thresholds).  This is the building
// block behind the heterogeneous and QoS forms and backs reports for any
// threshold rule.
AnalyticReport capacity_thresholds(const std::vector<double>& thresholds,
                                   const std::vector<pp::UserProfile>& profiles,
                                   RateModel model = RateModel::exact);

// Capture: a two-exceeder slot still delivers the stronger user's capacity
// (three or more exceeders lose the slot).  Adds to the heterogeneous
// formula the pair term
//   (1/2)(L/K)^2 e^(-L/K) sum_{i<j} 2 (L_i L_j / L^2)
//       (u + (s_i + s_j - s_i s_j/(s_i+s_j))),  s_i = sigma_i a_K,
// with the separable parts reduced to O(K) algebraically and the
// non-separable s_i s_j/(s_i+s_j) part summed exactly for K <= 5000 and by a
// deterministic strided sample above.
AnalyticReport capacity_capture(double u, const std::vector<pp::UserProfile>& profiles,
                                RateModel model = RateModel::exact);

// Mean of max(X_i, X_j) for independent exponentials with scales s_i, s_j:
// s_i + s_j - s_i s_j / (s_i + s_j).
double max_of_two_exponentials_mean(double s_i, double s_j);

// Mini-slot bin boundaries as excess offsets above the threshold:
// t_j = a_K ln(l/j), j = 1..l (t_l = 0).  Bin j covers excess [t_j, t_{j-1})
// with t_0 = inf; under the exponential excess law each bin has mass 1/l.
std::vector<double> bin_boundaries(std::uint64_t l, std::uint64_t K);

// Probability a slot is utilized under the binned scheme: the lowest-index
// occupied bin contains exactly one user (carrier sensing silences weaker
// bins).  Exceedance count is Binomial(K, k/K); occupancy is uniform over l
// bins; binomial terms below 1e-15 are truncated.
double enhanced_utilized_prob(std::uint64_t K, double k, std::uint64_t l);

// Birthday-style collision-free probability for k exceeders over l bins.
struct CollisionFree {
  double exact; // prod_{j=1}^{k-1} (1 - j/l), 0 when k-1 >= l
  double bound; // e^(-k(k-1)/(2l)), always >= exact
};
CollisionFree collision_free_bound(std::uint64_t k, std::uint64_t l);

// First-occupied-bin (mini-slot scan depth) statistics under the uniform
// occupancy model.  J = index of the strongest occupied bin, scanning bin 1
// first; counts exceedances as Binomial(K, k/K).
struct MaxBinStats {
  // Double sum  sum_{j=1..l} sum_m B(m) ((l-j)/l)^m = E[(J-1); m>=1]: the
  // mean number of silent bins scanned before the first occupied one (idle
  // slots contribute zero).  Kept alongside the conditional estimator
  // because the two are easy to conflate -- they differ by Pr(m >= 1).
  double silent_scan_sum;
  // E[J | m >= 1]: the validated scan-depth estimator.
  double conditional_mean;
  // pmf[j-1] = Pr(J = j and m >= 1), j = 1..l; sums to 1 - p_empty.
  std::vector<double> pmf;
  double p_empty; // Pr(m = 0) = (1 - k/K)^K
};
MaxBinStats expected_max_bin(std::uint64_t K, double k, std::uint64_t l);

// Report composition for the binned scheme: p_utilized from
// enhanced_utilized_prob, delay from the conditional scan depth, capacity as
// p_utilized * E[M_K] (the winner of a utilized slot is the strongest user,
// whose excess-over-threshold model is the population maximum).
AnalyticReport enhanced_report(std::uint64_t K, double k, std::uint64_t l, double mu,
                               double sigma);

// The u with extreme-value mean exceedance rate Lambda_T(u)/K equal to
// target ("set the threshold so x users exceed on average" under the model
// being studied).  Monotone bisection; domain error if target is not
// bracketed.
double tune_threshold_for_rate(const std::vector<pp::UserProfile>& profiles, double target);

namespace detail {
// Non-separable capture pair sum  sum_{i<j} L_i L_j s_i s_j / (s_i + s_j)
// with s_i = sigma_i (the a_K factor is applied by the caller).
// force_exact runs the O(K^2) loop regardless of K (tests compare the
// strided estimate against it).
double pair_nonseparable_sum(const std::vector<double>& lambda, const std::vector<double>& sigma,
                             bool force_exact);
} // namespace detail

} // namespace oppsim::an
