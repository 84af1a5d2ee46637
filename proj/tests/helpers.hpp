#pragma once
// Shared helpers for the test binaries: relative-error checks and the
// Kolmogorov-Smirnov distance between an empirical sample and a CDF.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace testutil {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(std::abs(want), 1e-9);
}

// Two-sided KS statistic sup_x |F_n(x) - F(x)|; sorts a copy of the sample.
template <class Cdf>
double ks_distance(std::vector<double> sample, Cdf&& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

} // namespace testutil
