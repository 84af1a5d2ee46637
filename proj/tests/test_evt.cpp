// EVT module tests: normalizing constants, threshold estimators, and tail
// laws, against extended-precision oracles frozen from independent
// evaluation, plus the distributional property that motivates all of it.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "helpers.hpp"
#include "oppsim/evt.hpp"
#include "oppsim/kernels.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

using namespace oppsim;
using testutil::rel_err;

TEST_CASE("normalizing constants match extended-precision oracles") {
  struct Row {
    std::uint64_t n;
    double mu, sigma, a, b;
  };
  const Row rows[] = {
      {500, 0.0, 1.0, 0.28364695705577601, 2.9074529989122945},
      {500, std::sqrt(2.0), 0.03, 0.0085094087116732803, 1.5014371523404639},
      {100, 0.0, 1.0, 0.32950511449113041, 2.366254792906394},
      {250, 0.0, 1.0, 0.30092481411367993, 2.6851787391808058},
      {1000, 0.0, 1.0, 0.26903979938020689, 3.116469885291314},
      {10000, 0.0, 1.0, 0.23299530089232804, 3.7384108184200115},
      {1000000, 0.0, 1.0, 0.1902398665508126, 4.7660057605667181},
      {100000000, 0.0, 1.0, 0.1647525572455652, 5.6212110140638315},
      {2, 0.0, 1.0, 0.84932180028801904, 0.25822669427980125},
  };
  for (const Row& r : rows) {
    const evt::NormConstants c = evt::norm_constants(r.n, r.mu, r.sigma);
    CHECK(rel_err(c.a, r.a) < 1e-13);
    CHECK(rel_err(c.b, r.b) < 1e-13);
    CHECK(c.n == r.n);
    CHECK(c.a > 0.0);
  }
}

TEST_CASE("normalizing constants: monotonicity in n") {
  // a strictly decreases for all n >= 2; b strictly increases once past the
  // log-log correction's turnover (it already holds from n = 2 upward).
  double pa = evt::norm_constants(2, 0.0, 1.0).a;
  double pb = evt::norm_constants(2, 0.0, 1.0).b;
  for (std::uint64_t n = 3; n <= 100000; ++n) {
    const evt::NormConstants c = evt::norm_constants(n, 0.0, 1.0);
    CHECK(c.a < pa);
    CHECK(c.b > pb);
    pa = c.a;
    pb = c.b;
  }
  // Geometric spot checks up to 10^7.
  for (std::uint64_t n = 100000; n < 10000000; n = n * 3 / 2) {
    const evt::NormConstants lo = evt::norm_constants(n, 0.0, 1.0);
    const evt::NormConstants hi = evt::norm_constants(n * 3 / 2 + 1, 0.0, 1.0);
    CHECK(hi.a < lo.a);
    CHECK(hi.b > lo.b);
  }
  CHECK(evt::norm_constants(2, 0, 1).a > evt::norm_constants(1000000, 0, 1).a);
}

TEST_CASE("normalizing constants: domain errors") {
  CHECK_THROWS_AS(evt::norm_constants(1, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(evt::norm_constants(0, 0.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(evt::norm_constants(10, 0.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(evt::norm_constants(10, 0.0, -1.0), std::domain_error);
}

TEST_CASE("expected maximum of n Gaussian draws") {
  CHECK(rel_err(evt::expected_max(500, std::sqrt(2.0), 0.03), 1.5063489163478913) < 1e-13);
  CHECK(rel_err(evt::expected_max(10, 0.0, 1.0), 1.6309007048134435) < 1e-13);
  CHECK(rel_err(evt::expected_max(100, 0.0, 1.0), 2.5564503066558475) < 1e-13);
  CHECK(rel_err(evt::expected_max(1000, 0.0, 1.0), 3.2717638719755352) < 1e-13);
  CHECK(rel_err(evt::expected_max(10000, 0.0, 1.0), 3.8728993559435093) < 1e-13);

  // Strictly increasing in n, asymptotically tracking sigma*sqrt(2 ln n)+mu:
  // the ratio rises toward 1.
  double prev = -1e300;
  double prev_ratio = 0.0;
  for (std::uint64_t n : {10, 100, 1000, 10000}) {
    const double m = evt::expected_max(n, 0.0, 1.0);
    CHECK(m > prev);
    const double ratio = m / std::sqrt(2.0 * std::log(static_cast<double>(n)));
    CHECK(ratio > prev_ratio);
    CHECK(ratio > 0.7);
    CHECK(ratio < 1.0);
    prev = m;
    prev_ratio = ratio;
  }

  // Zero variance degenerates to the mean.
  CHECK(evt::expected_max(1000, 5.0, 0.0) == 5.0);
}

TEST_CASE("exact Gaussian threshold matches quantile oracles") {
  struct Row {
    std::uint64_t K;
    double k, u;
  };
  const Row rows[] = {
      {100, 1.0, 2.3263478740408411},   {1000, 1.0, 3.0902323061678135},
      {10000, 1.0, 3.7190164854556806}, {1000000, 1.0, 4.7534243088228989},
      {100000000, 1.0, 5.6120012441747887},
      {1000, 7.0, 2.4572633902054373},  {100, 5.0, 1.6448536269514727},
      {1000, 2.0, 2.8781617390954834},  {1000, 3.0, 2.7477813854449928},
  };
  for (const Row& r : rows) {
    CHECK(rel_err(evt::threshold_gaussian(r.K, r.k, 0.0, 1.0), r.u) < 1e-13);
  }
  // Median: erfc^{-1}(1) = 0, so the threshold is exactly mu.
  CHECK(evt::threshold_gaussian(100, 50.0, 7.0, 2.0) == 7.0);
}

TEST_CASE("exact Gaussian threshold round-trips through the survival") {
  for (std::uint64_t K : {std::uint64_t{50}, std::uint64_t{1000}, std::uint64_t{100000},
                          std::uint64_t{100000000}}) {
    for (double k : {0.25, 1.0, 3.0, 17.0}) {
      if (!(k < static_cast<double>(K))) continue;
      for (double mu : {0.0, 1.4142135623730951}) {
        for (double sigma : {1.0, 0.03, 3.0}) {
          const double u = evt::threshold_gaussian(K, k, mu, sigma);
          const double back = evt::normal_survival((u - mu) / sigma) * static_cast<double>(K);
          CHECK(rel_err(back, k) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("threshold estimators are affine-equivariant in (mu, sigma)") {
  const std::uint64_t K = 4000;
  const double k = 3.0;
  const double mu = 1.4142135623730951;
  const double sigma = 0.03;
  const auto affine_ok = [&](double whole, double std_value) {
    CHECK(rel_err(whole, mu + sigma * std_value) < 1e-12);
  };
  affine_ok(evt::threshold_gaussian(K, k, mu, sigma), evt::threshold_gaussian(K, k, 0, 1));
  affine_ok(evt::threshold_gaussian_series(K, k, mu, sigma),
            evt::threshold_gaussian_series(K, k, 0, 1));
  affine_ok(evt::threshold_gumbel(K, k, mu, sigma), evt::threshold_gumbel(K, k, 0, 1));
  affine_ok(evt::threshold_gumbel_plain(K, k, mu, sigma),
            evt::threshold_gumbel_plain(K, k, 0, 1));
}

TEST_CASE("series threshold: frozen values and error vs exact") {
  struct Row {
    std::uint64_t K;
    double series, exact;
  };
  const Row rows[] = {
      {1000, 3.08132965725, 3.0902323061678135},
      {10000, 3.71139292479, 3.7190164854556806},
      {1000000, 4.74795064501, 4.7534243088228989},
      {100000000, 5.60785492056, 5.6120012441747887},
  };
  for (const Row& r : rows) {
    const double s = evt::threshold_gaussian_series(r.K, 1.0, 0.0, 1.0);
    CHECK(rel_err(s, r.series) < 1e-11);
    CHECK(std::abs(s - r.exact) < 0.01); // the expansion's advertised accuracy
    CHECK(s < r.exact);                  // truncation undershoots in this range
  }
  CHECK_THROWS_AS(evt::threshold_gaussian_series(10, 9.0, 0.0, 1.0), std::domain_error);
}

TEST_CASE("Gumbel return-level threshold: frozen values, ordering, limit ratio") {
  CHECK(rel_err(evt::threshold_gumbel(1000, 1.0, 0, 1), 3.21899104583) < 1e-11);
  CHECK(rel_err(evt::threshold_gumbel(1000000, 1.0, 0, 1), 4.97479640373) < 1e-11);
  CHECK(rel_err(evt::threshold_gumbel(100000000, 1.0, 0, 1), 5.88436519446) < 1e-11);
  CHECK(rel_err(evt::threshold_gumbel_plain(100000000, 1.0, 0, 1), 6.43788642862) < 1e-11);

  // Finite, and above the exact threshold (it protects k of sqrt(K) block
  // maxima rather than k of K users).
  const double g6 = evt::threshold_gumbel(1000000, 1.0, 0, 1);
  CHECK(std::isfinite(g6));
  CHECK(g6 > evt::threshold_gaussian(1000000, 1.0, 0, 1));

  // The ratio to the exact threshold approaches 3/(2*sqrt(2)) ~ 1.0607 from
  // below, slowly; at K = 10^8 it has reached ~1.0485.
  const double kLimit = 1.0606601717798214; // 3/(2 sqrt 2)
  double prev_ratio = 0.0;
  for (std::uint64_t K : {std::uint64_t{10000}, std::uint64_t{1000000},
                          std::uint64_t{100000000}}) {
    const double ratio =
        evt::threshold_gumbel(K, 1.0, 0, 1) / evt::threshold_gaussian(K, 1.0, 0, 1);
    CHECK(ratio > prev_ratio);
    CHECK(ratio < kLimit);
    prev_ratio = ratio;
  }
  CHECK(std::abs(prev_ratio - kLimit) < 0.015);

  // The uncorrected constants overshoot: their ratio is visibly above the
  // limit, which is why that form is a comparison evaluator only.
  const double plain_ratio = evt::threshold_gumbel_plain(100000000, 1.0, 0, 1) /
                             evt::threshold_gaussian(100000000, 1.0, 0, 1);
  CHECK(plain_ratio > kLimit);

  CHECK_THROWS_AS(evt::threshold_gumbel(100, 10.0, 0, 1), std::domain_error); // k = sqrt(K)
  CHECK_THROWS_AS(evt::threshold_gumbel(100, 0.0, 0, 1), std::domain_error);
}

TEST_CASE("exponential excess survival") {
  CHECK(evt::tail_excess_survival(0.0, 0.2) == 1.0);
  CHECK(rel_err(evt::tail_excess_survival(0.7, 0.7), std::exp(-1.0)) < 1e-15);
  CHECK(rel_err(evt::tail_excess_survival(2.0, 0.5), std::exp(-4.0)) < 1e-15);
  CHECK_THROWS_AS(evt::tail_excess_survival(-0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(evt::tail_excess_survival(1.0, 0.0), std::domain_error);
}

TEST_CASE("generalized Pareto survival") {
  CHECK(evt::gpd_survival(0.0, 1.0, 0.5) == 1.0);
  CHECK(rel_err(evt::gpd_survival(2.0, 1.0, 1.0), 1.0 / 3.0) < 1e-15);
  CHECK(evt::gpd_survival(2.0, 1.0, 0.0) == std::exp(-2.0));
  // Positive-part clamp: finite upper endpoint for xi < 0.
  CHECK(evt::gpd_survival(3.0, 1.0, -0.5) == 0.0);
  CHECK(evt::gpd_survival(1.9999, 1.0, -0.5) > 0.0);

  // xi -> 0 degenerates to the exponential law, pointwise.
  for (double xi : {1e-8, -1e-8, 1e-12, -1e-12}) {
    for (double x = 0.0; x <= 5.0; x += 0.25) {
      CHECK(std::abs(evt::gpd_survival(x, 1.0, xi) - evt::tail_excess_survival(x, 1.0)) < 1e-6);
    }
  }

  // Monotone nonincreasing in x.
  double prev = 1.0;
  for (double x = 0.0; x <= 10.0; x += 0.1) {
    const double s = evt::gpd_survival(x, 0.7, 0.3);
    CHECK(s <= prev);
    prev = s;
  }
}

TEST_CASE("GEV CDF: Gumbel limit, support clamps, monotonicity") {
  const evt::GevParams gumbel{0.0, 1.0, 2.0};
  for (double x = -5.0; x <= 9.0; x += 0.5) {
    CHECK(evt::gev_cdf(gumbel, x) == evt::gumbel_cdf((x - 1.0) / 2.0));
  }
  CHECK(rel_err(evt::gumbel_cdf(0.0), std::exp(-1.0)) < 1e-15);

  // xi > 0: support is x > location - scale/xi.
  const evt::GevParams frechet{0.5, 0.0, 1.0};
  CHECK(evt::gev_cdf(frechet, -2.0) == 0.0);
  CHECK(evt::gev_cdf(frechet, -1.9) > 0.0);
  // xi < 0: finite upper endpoint location + scale/|xi|.
  const evt::GevParams weibull{-0.5, 0.0, 1.0};
  CHECK(evt::gev_cdf(weibull, 2.1) == 1.0);
  CHECK(evt::gev_cdf(weibull, 1.9) < 1.0);

  double prev = 0.0;
  for (double x = -1.8; x <= 20.0; x += 0.2) {
    const double c = evt::gev_cdf(frechet, x);
    CHECK(c >= prev);
    prev = c;
  }
}

TEST_CASE("reciprocal hazard slope: normal, exponential, Pareto, no-limit") {
  SUBCASE("standard normal on [4, 8] is near the Gumbel domain (xi ~ 0)") {
    const evt::DistributionDescriptor normal{
        [](double x) { return evt::normal_survival(x); },
        [](double x) { return evt::normal_density(x); }, 4.0, 8.0};
    const evt::ShapeEstimate e = evt::reciprocal_hazard_shape(normal);
    CHECK(e.converged);
    CHECK(std::abs(e.xi) < 0.02);
    // d/dx h(x) = -1 + x*h(x) ~ -0.01494 at x = 8.
    CHECK(std::abs(e.xi - (-0.01494)) < 3e-4);
  }
  SUBCASE("exponential has identically unit reciprocal hazard") {
    const evt::DistributionDescriptor expo{[](double x) { return std::exp(-x); },
                                           [](double x) { return std::exp(-x); }, 1.0, 10.0};
    const evt::ShapeEstimate e = evt::reciprocal_hazard_shape(expo);
    CHECK(e.converged);
    CHECK(e.xi == 0.0);
  }
  SUBCASE("Pareto with survival x^-2 has slope 1/2") {
    const evt::DistributionDescriptor pareto{
        [](double x) { return 1.0 / (x * x); },
        [](double x) { return 2.0 / (x * x * x); }, 10.0, 10000.0};
    const evt::ShapeEstimate e = evt::reciprocal_hazard_shape(pareto);
    CHECK(e.converged);
    CHECK(std::abs(e.xi - 0.5) < 1e-9);
  }
  SUBCASE("oscillating slope reports no-limit") {
    const evt::DistributionDescriptor osc{
        [](double x) { return std::exp(-x); },
        [](double x) { return std::exp(-x) * (1.0 + 0.9 * std::sin(5.0 * x)); }, 1.0, 50.0};
    const evt::ShapeEstimate e = evt::reciprocal_hazard_shape(osc);
    CHECK_FALSE(e.converged);
  }
  CHECK_THROWS_AS(
      evt::reciprocal_hazard_shape(evt::DistributionDescriptor{
          [](double) { return 1.0; }, [](double) { return 1.0; }, -1.0, 2.0}),
      std::domain_error);
}

TEST_CASE("standardized maxima of 500 Gaussians approach the Gumbel law") {
  // 10^4 replications of M_500, standardized with the module's constants.
  // The law of (M_500 - b)/a sits at true KS distance ~0.051 from the Gumbel
  // limit (convergence in ln n is slow), so the strict 0.05 bound is checked
  // (and documented red) by the acceptance suite; here the test pins the
  // deterministic measurement and a bound that the convergence honestly
  // meets at this n.
  constexpr int kReps = 10000;
  constexpr int kN = 500;
  const evt::NormConstants c = evt::norm_constants(kN, 0.0, 1.0);
  const auto& k = kern::kernels();
  std::vector<double> draws(kN);
  std::vector<double> std_max(kReps);
  for (int r = 0; r < kReps; ++r) {
    k.fill_normals(20260817, static_cast<std::uint64_t>(r), StreamTag::capacity, 0, kN,
                   draws.data());
    double m = draws[0];
    for (int i = 1; i < kN; ++i) m = std::max(m, draws[i]);
    std_max[r] = (m - c.b) / c.a;
  }
  const double d = testutil::ks_distance(std_max, [](double x) { return evt::gumbel_cdf(x); });
  CHECK(d < 0.065);
  CHECK(d > 0.03); // the systematic gap at n=500 is real and visible
}
