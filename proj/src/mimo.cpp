#include "oppsim/mimo.hpp"

#include "oppsim/kernels.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <cmath>
#include <complex>
#include <stdexcept>

namespace oppsim::mimo {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

// One capacity draw: H entries are (z0 + i z1)/sqrt(2) with z ~ N(0,1) from
// the mimo stream, row-major over (row, col); C = log2 det(I_t + c H* H).
double capacity_draw(std::uint32_t r, std::uint32_t t, double c, std::uint64_t seed,
                     std::uint64_t sample, const kern::Kernels& kk, double* normals,
                     Eigen::MatrixXcd& H, Eigen::MatrixXcd& gram) {
  const std::size_t n_entries = static_cast<std::size_t>(r) * t;
  kk.fill_normals(seed, sample, StreamTag::mimo, 0, 2 * n_entries, normals);
  for (std::uint32_t row = 0; row < r; ++row)
    for (std::uint32_t col = 0; col < t; ++col) {
      const std::size_t flat = static_cast<std::size_t>(row) * t + col;
      H(row, col) = std::complex<double>(normals[2 * flat] * kInvSqrt2,
                                         normals[2 * flat + 1] * kInvSqrt2);
    }
  gram.setIdentity();
  gram.selfadjointView<Eigen::Lower>().rankUpdate(H.adjoint(), c);
  const Eigen::LLT<Eigen::Ref<Eigen::MatrixXcd>, Eigen::Lower> llt(gram);
  double log_det = 0.0;
  for (std::uint32_t i = 0; i < t; ++i) log_det += std::log(std::real(llt.matrixLLT()(i, i)));
  return 2.0 * log_det / std::log(2.0);
}

} // namespace

MimoFit sample_mimo_capacity(std::uint32_t r, std::uint32_t t, double P, std::uint64_t n_samples,
                             std::uint64_t seed) {
  if (r < 1 || t < 1) throw std::domain_error("sample_mimo_capacity: need r >= 1 and t >= 1");
  if (!(P >= 0.0)) throw std::domain_error("sample_mimo_capacity: power must be nonnegative");
  if (n_samples < 1) throw std::domain_error("sample_mimo_capacity: need at least one sample");

  const double c = P / static_cast<double>(t);
  const kern::Kernels& kk = kern::kernels();
  std::vector<double> normals(2 * static_cast<std::size_t>(r) * t);
  Eigen::MatrixXcd H(r, t), gram(t, t);

  MimoFit fit;
  fit.samples.resize(n_samples);
  for (std::uint64_t s = 0; s < n_samples; ++s)
    fit.samples[s] = capacity_draw(r, t, c, seed, s, kk, normals.data(), H, gram);

  const double n = static_cast<double>(n_samples);
  double mean = 0.0;
  for (double x : fit.samples) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : fit.samples) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  fit.mean = mean;
  fit.stddev = std::sqrt(m2);
  fit.skewness = m2 > 0.0 ? m3 / std::pow(m2, 1.5) : 0.0;
  fit.excess_kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;
  return fit;
}

} // namespace oppsim::mimo
