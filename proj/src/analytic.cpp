#include "oppsim/analytic.hpp"

#include "oppsim/evt.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

namespace oppsim::an {

namespace {

constexpr double kBinomialTruncation = 1e-15;

double binomial_p0(std::uint64_t K, double q) {
  return std::exp(static_cast<double>(K) * std::log1p(-q));
}

// Calls fn(m, B(m)) for every Binomial(K, q) pmf value >= 1e-15 (plus the
// sub-threshold terms left of the mode, which cost nothing and keep the
// recurrence exact).  Stops once past the mean with negligible mass.  When
// B(0) underflows (K q large) the recurrence runs in log space instead.
template <typename F>
void for_each_binomial_term(std::uint64_t K, double q, F&& fn) {
  const double mean = static_cast<double>(K) * q;
  const double b0 = binomial_p0(K, q);
  if (b0 > 0.0) {
    const double ratio = q / (1.0 - q);
    double b = b0;
    for (std::uint64_t m = 0; m <= K; ++m) {
      if (b >= kBinomialTruncation) fn(m, b);
      if (static_cast<double>(m) > mean && b < kBinomialTruncation) break;
      b *= ratio * static_cast<double>(K - m) / static_cast<double>(m + 1);
    }
    return;
  }
  const double log_ratio = std::log(q) - std::log1p(-q);
  double lb = static_cast<double>(K) * std::log1p(-q);
  for (std::uint64_t m = 0; m <= K; ++m) {
    const double b = std::exp(lb);
    if (b >= kBinomialTruncation) fn(m, b);
    if (static_cast<double>(m) > mean && b < kBinomialTruncation) break;
    lb += log_ratio + std::log(static_cast<double>(K - m) / static_cast<double>(m + 1));
  }
}

void check_population(const std::vector<pp::UserProfile>& profiles) {
  if (profiles.size() < 2) throw std::domain_error("analytic: need at least two user profiles");
}

double a_K_standard(std::uint64_t K) {
  return evt::norm_constants(K, 0.0, 1.0).a;
}

struct RateSums {
  std::vector<double> lambda;
  double total = 0.0;
};

RateSums rates_at(const std::vector<double>& thresholds,
                  const std::vector<pp::UserProfile>& profiles, RateModel model) {
  const std::uint64_t K = profiles.size();
  RateSums out;
  out.lambda.resize(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double u = thresholds.size() == 1 ? thresholds[0] : thresholds[i];
    out.lambda[i] = model == RateModel::exact ? pp::user_rate_exact(u, profiles[i], K)
                                              : pp::user_rate(u, profiles[i], K);
    out.total += out.lambda[i];
  }
  return out;
}

// Shared single-winner capacity assembly:
//   C = (L/K) e^(-L/K) sum_i (L_i/L)(u_i + sigma_i a_K).
AnalyticReport single_winner_report(Scheme scheme, std::vector<double> thresholds,
                                    const std::vector<pp::UserProfile>& profiles,
                                    const RateSums& rates) {
  const std::uint64_t K = profiles.size();
  const double aK = a_K_standard(K);
  AnalyticReport rep;
  rep.scheme = scheme;
  if (rates.total <= 0.0) {
    rep.expected_capacity = 0.0;
    rep.p_idle = 1.0;
    rep.p_collision = 0.0;
    rep.p_utilized = 0.0;
    rep.thresholds = std::move(thresholds);
    return rep;
  }
  double weighted = 0.0; // sum_i L_i (u_i + sigma_i a_K)
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double u = thresholds.size() == 1 ? thresholds[0] : thresholds[i];
    weighted += rates.lambda[i] * (u + profiles[i].sigma * aK);
  }
  const double lam = rates.total / static_cast<double>(K);
  const double idle = std::exp(-lam);
  rep.p_idle = idle;
  rep.p_utilized = lam * idle;
  rep.p_collision = std::max(0.0, 1.0 - rep.p_idle - rep.p_utilized);
  rep.expected_capacity = rep.p_utilized * weighted / rates.total;
  rep.thresholds = std::move(thresholds);
  return rep;
}

} // namespace

AnalyticReport capacity_homogeneous(std::uint64_t K, double k, double mu, double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("capacity_homogeneous: sigma must be positive");
  const double u_k = evt::threshold_gaussian(K, k, mu, sigma); // validates K and k
  const double aK = evt::norm_constants(K, mu, sigma).a;       // sigma * a_K
  AnalyticReport rep;
  rep.scheme = Scheme::homogeneous;
  rep.p_idle = std::exp(-k);
  rep.p_utilized = k * rep.p_idle;
  rep.p_collision = std::max(0.0, 1.0 - rep.p_idle - rep.p_utilized);
  rep.expected_capacity = rep.p_utilized * (u_k + aK);
  rep.thresholds = {u_k};
  return rep;
}

AnalyticReport capacity_heterogeneous(double u, const std::vector<pp::UserProfile>& profiles,
                                      RateModel model) {
  check_population(profiles);
  if (!std::isfinite(u)) throw std::domain_error("capacity_heterogeneous: threshold must be finite");
  std::vector<double> thresholds{u};
  const RateSums rates = rates_at(thresholds, profiles, model);
  return single_winner_report(Scheme::heterogeneous, std::move(thresholds), profiles, rates);
}

AnalyticReport capacity_thresholds(const std::vector<double>& thresholds,
                                   const std::vector<pp::UserProfile>& profiles,
                                   RateModel model) {
  check_population(profiles);
  if (thresholds.size() != 1 && thresholds.size() != profiles.size())
    throw std::invalid_argument("capacity_thresholds: expected 1 or K thresholds");
  for (double u : thresholds)
    if (!std::isfinite(u))
      throw std::domain_error("capacity_thresholds: thresholds must be finite");
  std::vector<double> th = thresholds;
  const RateSums rates = rates_at(th, profiles, model);
  const Scheme label = thresholds.size() == 1 ? Scheme::heterogeneous : Scheme::qos;
  return single_winner_report(label, std::move(th), profiles, rates);
}

AnalyticReport capacity_qos(const std::vector<pp::UserProfile>& profiles, RateModel model) {
  check_population(profiles);
  std::vector<double> thresholds(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i)
    thresholds[i] = pp::qos_threshold(profiles[i]); // throws if qos_p unset/invalid
  const RateSums rates = rates_at(thresholds, profiles, model);
  return single_winner_report(Scheme::qos, std::move(thresholds), profiles, rates);
}

AnalyticReport capacity_equal_share(const std::vector<pp::UserProfile>& profiles,
                                    RateModel model) {
  check_population(profiles);
  std::vector<pp::UserProfile> shared = profiles;
  const double p = 1.0 / static_cast<double>(shared.size());
  for (auto& prof : shared) prof.qos_p = p;
  AnalyticReport rep = capacity_qos(shared, model);
  rep.scheme = Scheme::equal_share;
  return rep;
}

double max_of_two_exponentials_mean(double s_i, double s_j) {
  if (!(s_i > 0.0) || !(s_j > 0.0))
    throw std::domain_error("max_of_two_exponentials_mean: scales must be positive");
  return s_i + s_j - s_i * s_j / (s_i + s_j);
}

namespace detail {

double pair_nonseparable_sum(const std::vector<double>& lambda, const std::vector<double>& sigma,
                             bool force_exact) {
  const std::size_t K = lambda.size();
  if (sigma.size() != K) throw std::invalid_argument("pair_nonseparable_sum: size mismatch");
  if (K < 2) return 0.0;
  const std::uint64_t npairs = static_cast<std::uint64_t>(K) * (K - 1) / 2;
  constexpr std::uint64_t kPairBudget = 10'000'000;
  if (force_exact || K <= 5000 || npairs <= kPairBudget) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < K; ++i) {
      double row = 0.0;
      for (std::size_t j = i + 1; j < K; ++j)
        row += lambda[j] * sigma[i] * sigma[j] / (sigma[i] + sigma[j]);
      total += lambda[i] * row;
    }
    return total;
  }
  // Deterministic strided subsample: every stride-th pair along each row,
  // with a per-row offset decorrelating the lattice from index structure.
  const std::uint64_t stride = (npairs + kPairBudget - 1) / kPairBudget;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < K; ++i) {
    const std::size_t offset = static_cast<std::size_t>((i * 2654435761ULL) % stride);
    double row = 0.0;
    for (std::size_t j = i + 1 + offset; j < K; j += static_cast<std::size_t>(stride))
      row += lambda[j] * sigma[i] * sigma[j] / (sigma[i] + sigma[j]);
    total += lambda[i] * row * static_cast<double>(stride);
  }
  return total;
}

} // namespace detail

AnalyticReport capacity_capture(double u, const std::vector<pp::UserProfile>& profiles,
                                RateModel model) {
  check_population(profiles);
  if (!std::isfinite(u)) throw std::domain_error("capacity_capture: threshold must be finite");
  const std::uint64_t K = profiles.size();
  std::vector<double> thresholds{u};
  const RateSums rates = rates_at(thresholds, profiles, model);
  AnalyticReport rep =
      single_winner_report(Scheme::capture, std::move(thresholds), profiles, rates);
  rep.scheme = Scheme::capture;
  if (rates.total <= 0.0) return rep;

  const double aK = a_K_standard(K);
  // Separable reductions of sum_{i<j} 2 L_i L_j (u + (s_i + s_j) a_K).
  double s1 = 0.0, s2 = 0.0, s_sig = 0.0, s2_sig = 0.0;
  std::vector<double> sigmas(profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    const double li = rates.lambda[i];
    sigmas[i] = profiles[i].sigma;
    s1 += li;
    s2 += li * li;
    s_sig += li * sigmas[i];
    s2_sig += li * li * sigmas[i];
  }
  const double pair_u = u * (s1 * s1 - s2);
  const double pair_sum_sig = 2.0 * aK * (s_sig * s1 - s2_sig);
  const double pair_nonsep =
      2.0 * aK * detail::pair_nonseparable_sum(rates.lambda, sigmas, false);
  const double pair_weighted = pair_u + pair_sum_sig - pair_nonsep;

  const double lam = rates.total / static_cast<double>(K);
  const double idle = std::exp(-lam);
  const double p_two = 0.5 * lam * lam * idle;
  rep.expected_capacity += p_two * pair_weighted / (rates.total * rates.total);
  rep.p_utilized += p_two;
  rep.p_collision = std::max(0.0, 1.0 - rep.p_idle - rep.p_utilized);
  return rep;
}

std::vector<double> bin_boundaries(std::uint64_t l, std::uint64_t K) {
  if (l < 1) throw std::domain_error("bin_boundaries: need at least one bin");
  const double aK = a_K_standard(K); // validates K >= 2
  std::vector<double> t(l);
  for (std::uint64_t j = 1; j <= l; ++j)
    t[j - 1] = aK * std::log(static_cast<double>(l) / static_cast<double>(j));
  t[l - 1] = 0.0;
  return t;
}

double enhanced_utilized_prob(std::uint64_t K, double k, std::uint64_t l) {
  if (K < 2) throw std::domain_error("enhanced_utilized_prob: need K >= 2");
  if (!(k > 0.0) || !(k < static_cast<double>(K)))
    throw std::domain_error("enhanced_utilized_prob: need k in (0, K)");
  if (l < 1) throw std::domain_error("enhanced_utilized_prob: need at least one bin");
  const double q = k / static_cast<double>(K);
  const double inv_l = 1.0 / static_cast<double>(l);
  // sum_m B(m) (m/l) sum_{i=0}^{l-1} (i/l)^(m-1); the power table is updated
  // one multiply per m so the whole evaluation is O(l * m_max).
  std::vector<double> pw(l, 1.0); // (i/l)^(m-1), starting at m = 1
  std::vector<double> r(l);
  for (std::uint64_t i = 0; i < l; ++i) r[i] = static_cast<double>(i) * inv_l;
  double total = 0.0;
  std::uint64_t m_done = 0;
  for_each_binomial_term(K, q, [&](std::uint64_t m, double b) {
    if (m == 0) return;
    while (m_done + 1 < m) { // advance power table to exponent m-1
      for (std::uint64_t i = 0; i < l; ++i) pw[i] *= r[i];
      ++m_done;
    }
    double inner = 0.0;
    for (std::uint64_t i = 0; i < l; ++i) inner += pw[i];
    total += b * static_cast<double>(m) * inv_l * inner;
    for (std::uint64_t i = 0; i < l; ++i) pw[i] *= r[i];
    ++m_done;
  });
  return total;
}

CollisionFree collision_free_bound(std::uint64_t k, std::uint64_t l) {
  if (k < 1 || l < 1) throw std::domain_error("collision_free_bound: need k >= 1 and l >= 1");
  CollisionFree out;
  const double kd = static_cast<double>(k);
  out.bound = std::exp(-kd * (kd - 1.0) / (2.0 * static_cast<double>(l)));
  if (k - 1 >= l) {
    out.exact = 0.0;
    return out;
  }
  double prod = 1.0;
  for (std::uint64_t j = 1; j < k; ++j)
    prod *= 1.0 - static_cast<double>(j) / static_cast<double>(l);
  out.exact = prod;
  return out;
}

MaxBinStats expected_max_bin(std::uint64_t K, double k, std::uint64_t l) {
  if (K < 2) throw std::domain_error("expected_max_bin: need K >= 2");
  if (!(k > 0.0) || !(k < static_cast<double>(K)))
    throw std::domain_error("expected_max_bin: need k in (0, K)");
  if (l < 1) throw std::domain_error("expected_max_bin: need at least one bin");
  const double q = k / static_cast<double>(K);
  // T[i] = sum_{m>=1} B(m) (i/l)^m for i = 0..l; everything below reads off
  // T: Pr(J > j, m >= 1) = T[l-j], pmf(j) = T[l-j+1] - T[l-j].
  std::vector<double> T(l + 1, 0.0);
  std::vector<double> pw(l + 1), r(l + 1);
  for (std::uint64_t i = 0; i <= l; ++i) {
    r[i] = static_cast<double>(i) / static_cast<double>(l);
    pw[i] = r[i]; // (i/l)^m starting at m = 1
  }
  std::uint64_t m_done = 0;
  for_each_binomial_term(K, q, [&](std::uint64_t m, double b) {
    if (m == 0) return;
    while (m_done + 1 < m) {
      for (std::uint64_t i = 0; i <= l; ++i) pw[i] *= r[i];
      ++m_done;
    }
    for (std::uint64_t i = 0; i <= l; ++i) T[i] += b * pw[i];
    for (std::uint64_t i = 0; i <= l; ++i) pw[i] *= r[i];
    ++m_done;
  });
  MaxBinStats out;
  out.p_empty = binomial_p0(K, q);
  double e_joint = 0.0; // E[J; m >= 1] = sum_{j=0}^{l-1} T[l-j]
  for (std::uint64_t j = 0; j < l; ++j) e_joint += T[l - j];
  double silent = 0.0; // sum_{j=1}^{l} T[l-j]
  for (std::uint64_t j = 1; j <= l; ++j) silent += T[l - j];
  out.silent_scan_sum = silent;
  const double p_some = 1.0 - out.p_empty;
  out.conditional_mean = p_some > 0.0 ? e_joint / p_some : 0.0;
  out.pmf.resize(l);
  for (std::uint64_t j = 1; j <= l; ++j) out.pmf[j - 1] = std::max(0.0, T[l - j + 1] - T[l - j]);
  return out;
}

AnalyticReport enhanced_report(std::uint64_t K, double k, std::uint64_t l, double mu,
                               double sigma) {
  if (!(sigma > 0.0)) throw std::domain_error("enhanced_report: sigma must be positive");
  AnalyticReport rep;
  rep.scheme = Scheme::enhanced;
  rep.p_utilized = enhanced_utilized_prob(K, k, l);
  rep.p_idle = binomial_p0(K, k / static_cast<double>(K));
  rep.p_collision = std::max(0.0, 1.0 - rep.p_idle - rep.p_utilized);
  // A utilized slot is won by the population's strongest user, so the
  // capacity model is the expected population maximum.
  rep.expected_capacity = rep.p_utilized * evt::expected_max(K, mu, sigma);
  rep.expected_delay_minislots = expected_max_bin(K, k, l).conditional_mean;
  rep.thresholds = {evt::threshold_gaussian(K, k, mu, sigma)};
  return rep;
}

double tune_threshold_for_rate(const std::vector<pp::UserProfile>& profiles, double target) {
  check_population(profiles);
  if (!(target > 0.0) || !std::isfinite(target))
    throw std::domain_error("tune_threshold_for_rate: target rate must be positive and finite");
  const std::uint64_t K = profiles.size();
  const auto mean_rate = [&](double u) {
    return pp::total_rate(u, profiles).total / static_cast<double>(K);
  };
  double mu_lo = std::numeric_limits<double>::infinity();
  double mu_hi = -std::numeric_limits<double>::infinity();
  double sig_hi = 0.0;
  for (const auto& prof : profiles) {
    mu_lo = std::min(mu_lo, prof.mu);
    mu_hi = std::max(mu_hi, prof.mu);
    sig_hi = std::max(sig_hi, prof.sigma);
  }
  double lo = mu_lo - 40.0 * sig_hi;
  double hi = mu_hi + 60.0 * sig_hi;
  for (int grow = 0; grow < 8 && mean_rate(lo) < target; ++grow) lo -= hi - lo;
  for (int grow = 0; grow < 8 && mean_rate(hi) > target; ++grow) hi += hi - lo;
  if (!(mean_rate(lo) >= target && target >= mean_rate(hi)))
    throw std::domain_error("tune_threshold_for_rate: target rate not bracketed");
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mean_rate(mid) >= target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace oppsim::an
