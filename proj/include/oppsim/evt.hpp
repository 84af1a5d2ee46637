#pragma once
// Extreme-value machinery for Gaussian per-user capacities: normalizing
// constants of the Gumbel limit, threshold estimators (exact Gaussian
// quantile, truncated-series approximation, Gumbel return level), and the
// tail laws (exponential excess, generalized Pareto, GEV).
//
// All operations are pure functions; all logarithms are natural.

#include <cstdint>
#include <functional>

namespace oppsim::evt {

inline constexpr double kEulerGamma = 0.5772156649015329;

// Gaussian survival 1 - Phi(z), evaluated via erfc (accurate in the far tail).
double normal_survival(double z);
// Standard normal density.
double normal_density(double z);

// Normalizing constants a_n, b_n of the Gumbel limit for the maximum of n
// i.i.d. N(mu, sigma^2) draws:  (M_n - b_n)/a_n  ==>  exp(-e^(-x)).
struct NormConstants {
  double a; // scale, > 0, strictly decreasing in n
  double b; // location, strictly increasing in n past the log-log turnover
  std::uint64_t n;
};

NormConstants norm_constants(std::uint64_t n, double mu, double sigma);

namespace detail {
// Same formulas for a real-valued sample count (return levels use n = K^(1/2)/k,
// which need not be an integer).  Standard case only (mu=0, sigma=1 scaling is
// applied by callers).  Requires n > 1.
struct AB {
  double a, b;
};
AB norm_constants_real(double n);
} // namespace detail

// E[max of n i.i.d. N(mu, sigma^2)] under the Gumbel limit:
// sigma*(b_n + a_n*gamma) + mu with standard-case constants.  sigma = 0
// degenerates to mu.
double expected_max(std::uint64_t n, double mu, double sigma);

// Exact threshold: the u with  1 - Phi((u-mu)/sigma) = k/K,  i.e. on average
// k of K users exceed u each slot.  Computed as mu - sigma*Q(k/K) with the
// full-precision normal quantile Q, which stays well-conditioned arbitrarily
// deep in the tail (no 1-p cancellation).
double threshold_gaussian(std::uint64_t K, double k, double mu, double sigma);

// Truncated-series approximation of the same threshold,
//   u = mu + sigma*sqrt(2L - ln(2*pi*(2L - ln 2*pi))),  L = ln(K/k).
// Kept as a cross-check evaluator; its error is visible at small K.
double threshold_gaussian_series(std::uint64_t K, double k, double mu, double sigma);

// Gumbel return level over block maxima: split the K users into sqrt(K)
// blocks of sqrt(K) (formulas use the real-valued sqrt(K); when K is not a
// perfect square the simulation-side construction rounds to floor(K/floor(sqrt(K)))
// blocks), target exceedance probability p = k/sqrt(K) among the block maxima,
//   u_p = b_n - a_n * ln(-ln(1-p)),   n = 1/p = sqrt(K)/k,
// with the full normalizing constants of norm_constants (log-log correction
// included).  Requires 0 < k < sqrt(K).
double threshold_gumbel(std::uint64_t K, double k, double mu, double sigma);

// Same return level with the uncorrected constants a_n = (2 ln n)^(-1/2),
// b_n = (2 ln n)^(1/2).  Comparison evaluator only: the missing correction
// inflates the threshold noticeably (see tests).
double threshold_gumbel_plain(std::uint64_t K, double k, double mu, double sigma);

// Survival of the exponential excess law above a high threshold: e^(-x/a).
double tail_excess_survival(double x, double a);

// Generalized Pareto survival [(1 + xi*x/sigma_v)_+]^(-1/xi); xi = 0 is the
// exponential limit.  Stable for tiny |xi| (log1p formulation).
double gpd_survival(double x, double sigma_v, double xi);

// Standard Gumbel CDF exp(-e^(-z)).
double gumbel_cdf(double z);

struct GevParams {
  double xi;
  double location;
  double scale; // > 0
};

// GEV CDF; xi = 0 selects the Gumbel limit.  Outside the support the CDF is
// clamped to 0 / 1 per the positive-part convention.
double gev_cdf(const GevParams& g, double x);

// Numerical limit of d/dx[(1-F)/f] approaching the upper endpoint: the GEV
// shape a distribution's maxima obey.  Evaluated on a 32-point geometric grid
// over [grid_start, grid_end] with central differences, step 1e-4*x.
struct DistributionDescriptor {
  std::function<double(double)> survival; // 1 - F
  std::function<double(double)> density;  // f
  double grid_start; // > 0
  double grid_end;   // > grid_start, approaching the upper endpoint
};

struct ShapeEstimate {
  double xi;      // slope at the last grid point
  bool converged; // false when the finite-difference sequence has not settled
};

ShapeEstimate reciprocal_hazard_shape(const DistributionDescriptor& dist);

} // namespace oppsim::evt
