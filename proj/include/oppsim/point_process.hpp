#pragma once
// Poisson exceedance-rate model over the user population: per-user and total
// threshold-exceedance rates, per-user QoS rates, and the per-slot
// exceedance-count law.
//
// Rates follow the population-scaled convention: a user's rate Lambda_i
// approximates K * P(capacity_i > u), so the homogeneous threshold u_k (k of
// K users exceed on average) gives Lambda_i ~ k for every user and the
// per-slot Poisson count mean is Lambda_T / K.
//
// Two rate backends exist side by side:
//   - the extreme-value form  Lambda_i = exp(-(u - (sigma_i b_K + mu_i)) /
//     (sigma_i a_K)), the model under study, and
//   - the exact form  K * (1 - Phi((u - mu_i)/sigma_i)),
// so downstream consumers can separate the EVT approximation error from
// Monte Carlo noise.

#include <cstdint>
#include <optional>
#include <vector>

namespace oppsim::pp {

struct UserProfile {
  double mu;                   // mean capacity (units fixed system-wide)
  double sigma;                // capacity standard deviation, > 0
  std::optional<double> qos_p; // per-user exceedance probability, in (0,1)
};

struct RateVector {
  std::vector<double> per_user;  // Lambda_i >= 0
  double total;                  // Lambda_T = sum of per_user
  std::vector<double> threshold; // size 1 (common u) or K (per-user)
  std::uint64_t K;
};

// Gumbel/GEV exceedance intensity (1 + xi*v)_+^(-1/xi); xi = 0 gives e^(-v).
// Below the support's lower edge (xi > 0, 1 + xi*v <= 0) the intensity
// diverges and +infinity is returned; above the upper endpoint (xi < 0) it
// is 0.
double intensity_above(double v, double xi);

// Extreme-value per-user rate at common threshold u.  K >= 2 (normalizing
// constants); may underflow to 0 for huge u.
double user_rate(double u, const UserProfile& profile, std::uint64_t K);
// Exact counterpart K * (1 - Phi((u - mu_i)/sigma_i)).
double user_rate_exact(double u, const UserProfile& profile, std::uint64_t K);

// Rates for a whole population at a common threshold (K = profiles.size()).
RateVector total_rate(double u, const std::vector<UserProfile>& profiles);
RateVector total_rate_exact(double u, const std::vector<UserProfile>& profiles);
// Per-user thresholds (u.size() == profiles.size()).
RateVector total_rate(const std::vector<double>& u, const std::vector<UserProfile>& profiles);
RateVector total_rate_exact(const std::vector<double>& u,
                            const std::vector<UserProfile>& profiles);

// Per-user QoS threshold u_{p_i}: the Gumbel return level at probability
// p_i = profile.qos_p, scaled by (mu_i, sigma_i).
double qos_threshold(const UserProfile& profile);

// QoS rate by direct substitution of u_{p_i} into the extreme-value rate --
// the definitionally consistent route, used by all downstream capacity
// formulas.
double qos_rate(const UserProfile& profile, std::uint64_t K);

// Alternative closed form exp(-(b_K + b_{1/p})/a_K) * (-ln(1-p))^{a_{1/p}}
// (standard-case constants).  It disagrees with direct substitution in the
// sign of the b-term and in the exponent (a_{1/p} vs a_{1/p}/a_K); it is
// kept as a comparison evaluator and never feeds capacity formulas.
double qos_rate_closed_form(const UserProfile& profile, std::uint64_t K);

// Per-slot exceedance-count law: Poisson with mean rate_total / K.
double count_pmf(double rate_total, std::uint64_t K, std::uint64_t count);

} // namespace oppsim::pp
