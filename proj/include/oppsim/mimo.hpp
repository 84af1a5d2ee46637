#pragma once
// Monte Carlo of the instantaneous MIMO link capacity
//   C = log2 det(I_r + (P/t) H H*),  H: r x t, i.i.d. CN(0, 1) entries,
// validating the premise that C is well modeled as Gaussian for large
// antenna counts.  Evaluated through the t x t Gram form
// det(I_t + (P/t) H* H), identical by the determinant identity and far
// cheaper when t << r.

#include <cstdint>
#include <vector>

namespace oppsim::mimo {

struct MimoFit {
  std::vector<double> samples;
  double mean = 0.0;
  double stddev = 0.0;
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

// n_samples capacity draws plus the Gaussian moment fit.  Entry draws come
// from the mimo RNG stream (slot = sample index), so samples are
// reproducible and independent of batching.
MimoFit sample_mimo_capacity(std::uint32_t r, std::uint32_t t, double P, std::uint64_t n_samples,
                             std::uint64_t seed);

} // namespace oppsim::mimo
