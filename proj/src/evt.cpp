#include "oppsim/evt.hpp"

#include "oppsim/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace oppsim::evt {

namespace {
constexpr double kLn4Pi = 2.531024246969291; // ln(4*pi)
constexpr double kLn2Pi = 1.8378770664093455; // ln(2*pi)
// Below this the normal quantile's tail rational leaves its validated range.
constexpr double kQuantileFloor = 1e-300;
} // namespace

double normal_survival(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_density(double z) {
  return std::exp(-0.5 * z * z) * 0.3989422804014326779; // 1/sqrt(2*pi)
}

namespace detail {
AB norm_constants_real(double n) {
  const double t = 2.0 * std::log(n); // > 0 for n > 1
  const double rt = std::sqrt(t);
  const double a = 1.0 / rt;
  const double b = rt - 0.5 / rt * (std::log(std::log(n)) + kLn4Pi);
  return {a, b};
}
} // namespace detail

NormConstants norm_constants(std::uint64_t n, double mu, double sigma) {
  if (n < 2) {
    throw std::domain_error("norm_constants: n must be >= 2 (got " + std::to_string(n) + ")");
  }
  if (!(sigma > 0.0)) {
    throw std::domain_error("norm_constants: sigma must be > 0");
  }
  const detail::AB std_ab = detail::norm_constants_real(static_cast<double>(n));
  return {sigma * std_ab.a, sigma * std_ab.b + mu, n};
}

double expected_max(std::uint64_t n, double mu, double sigma) {
  if (n < 2) {
    throw std::domain_error("expected_max: n must be >= 2");
  }
  if (sigma == 0.0) return mu; // degenerate: every draw equals the mean
  const detail::AB std_ab = detail::norm_constants_real(static_cast<double>(n));
  return sigma * (std_ab.b + std_ab.a * kEulerGamma) + mu;
}

double threshold_gaussian(std::uint64_t K, double k, double mu, double sigma) {
  if (!(k > 0.0) || !(k < static_cast<double>(K))) {
    throw std::domain_error("threshold_gaussian: need 0 < k < K");
  }
  const double p = k / static_cast<double>(K);
  if (p < kQuantileFloor) {
    throw std::domain_error("threshold_gaussian: k/K = " + std::to_string(p) +
                            " underflows the quantile (supported down to 1e-300)");
  }
  // 1 - Phi(z) = p  <=>  z = -Q(p); well-conditioned because p is the small tail.
  return mu - sigma * kern::normal_quantile(p);
}

double threshold_gaussian_series(std::uint64_t K, double k, double mu, double sigma) {
  if (!(k > 0.0) || !(k < static_cast<double>(K))) {
    throw std::domain_error("threshold_gaussian_series: need 0 < k < K");
  }
  const double L = std::log(static_cast<double>(K) / k);
  const double inner = 2.0 * L - kLn2Pi;
  if (!(inner > 0.0)) {
    throw std::domain_error("threshold_gaussian_series: K/k too small for the expansion");
  }
  const double arg = 2.0 * L - std::log(2.0 * std::numbers::pi * inner);
  if (!(arg > 0.0)) {
    throw std::domain_error("threshold_gaussian_series: K/k too small for the expansion");
  }
  return mu + sigma * std::sqrt(arg);
}

namespace {
double gumbel_return_level(std::uint64_t K, double k, double mu, double sigma, bool full) {
  const double sqrtK = std::sqrt(static_cast<double>(K));
  if (!(k > 0.0) || !(k < sqrtK)) {
    throw std::domain_error("threshold_gumbel: need 0 < k < sqrt(K)");
  }
  const double p = k / sqrtK; // exceedance probability among block maxima
  const double n = 1.0 / p;   // block count the constants normalize
  double a;
  double b;
  if (full) {
    const detail::AB ab = detail::norm_constants_real(n);
    a = ab.a;
    b = ab.b;
  } else {
    const double t = 2.0 * std::log(n);
    a = 1.0 / std::sqrt(t);
    b = std::sqrt(t);
  }
  const double z = -std::log1p(-p); // -ln(1-p), stable for small p
  return mu + sigma * (b - a * std::log(z));
}
} // namespace

double threshold_gumbel(std::uint64_t K, double k, double mu, double sigma) {
  return gumbel_return_level(K, k, mu, sigma, /*full=*/true);
}

double threshold_gumbel_plain(std::uint64_t K, double k, double mu, double sigma) {
  return gumbel_return_level(K, k, mu, sigma, /*full=*/false);
}

double tail_excess_survival(double x, double a) {
  if (!(x >= 0.0) || !(a > 0.0)) {
    throw std::domain_error("tail_excess_survival: need x >= 0 and a > 0");
  }
  return std::exp(-x / a);
}

double gpd_survival(double x, double sigma_v, double xi) {
  if (!(sigma_v > 0.0)) {
    throw std::domain_error("gpd_survival: need sigma_v > 0");
  }
  const double v = x / sigma_v;
  if (xi == 0.0) return std::exp(-v);
  const double t = 1.0 + xi * v;
  if (t <= 0.0) return 0.0; // positive-part clamp: beyond the upper endpoint
  return std::exp(-std::log1p(xi * v) / xi);
}

double gumbel_cdf(double z) { return std::exp(-std::exp(-z)); }

double gev_cdf(const GevParams& g, double x) {
  if (!(g.scale > 0.0)) {
    throw std::domain_error("gev_cdf: need scale > 0");
  }
  const double z = (x - g.location) / g.scale;
  if (g.xi == 0.0) return gumbel_cdf(z);
  const double t = 1.0 + g.xi * z;
  if (t <= 0.0) return g.xi > 0.0 ? 0.0 : 1.0; // left/right of the support
  return std::exp(-std::exp(-std::log1p(g.xi * z) / g.xi));
}

ShapeEstimate reciprocal_hazard_shape(const DistributionDescriptor& dist) {
  if (!(dist.grid_start > 0.0) || !(dist.grid_end > dist.grid_start)) {
    throw std::domain_error("reciprocal_hazard_shape: need 0 < grid_start < grid_end");
  }
  constexpr int kPoints = 32;
  const double ratio = std::pow(dist.grid_end / dist.grid_start,
                                1.0 / static_cast<double>(kPoints - 1));
  const auto g = [&](double x) { return dist.survival(x) / dist.density(x); };

  std::vector<double> slope(kPoints);
  double x = dist.grid_start;
  for (int i = 0; i < kPoints; ++i, x *= ratio) {
    const double h = 1e-4 * x;
    slope[i] = (g(x + h) - g(x - h)) / (2.0 * h);
  }

  const double last = slope[kPoints - 1];
  const double prev = slope[kPoints - 2];
  const bool finite = std::isfinite(last) && std::isfinite(prev);
  // Settled when the final step of the slope sequence moves by less than an
  // absolute 1e-3 or 2% of the estimate, whichever is larger.
  const bool settled =
      finite && std::abs(last - prev) <= std::max(1e-3, 0.02 * std::abs(last));
  return {last, settled};
}

} // namespace oppsim::evt
