// Scalar reference variant of the compute kernels, plus the single-value
// helpers shared by every build.  This translation unit is compiled with the
// baseline ISA flags only.

#include "oppsim/kernels.hpp"
#include "oppsim/vecmath.hpp"

namespace oppsim::kern {

namespace {

void fill_lattice_scalar(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                         std::uint32_t base_block, std::size_t nblocks, std::uint64_t* out) {
  for (std::size_t j = 0; j < nblocks; ++j) {
    const LatticePair lp =
        philox_lattice(seed, slot, static_cast<std::uint32_t>(base_block + j), tag);
    out[2 * j] = lp.v0;
    out[2 * j + 1] = lp.v1;
  }
}

void fill_normals_scalar(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                         std::uint32_t base_block, std::size_t n, double* out) {
  using vec::D1;
  using vec::U1;
  std::size_t i = 0;
  std::uint32_t block = base_block;
  while (i < n) {
    const LatticePair lp = philox_lattice(seed, slot, block++, tag);
    const std::uint64_t words[2] = {lp.v0, lp.v1};
    for (int w = 0; w < 2 && i < n; ++w, ++i) {
      const D1 u = vec::vuniform_from_lattice<D1>(U1{words[w]});
      out[i] = vec::normal_quantile(u).v;
    }
  }
}

} // namespace

namespace detail {
const Kernels& scalar_kernels() {
  static const Kernels k{&fill_lattice_scalar, &fill_normals_scalar, "scalar"};
  return k;
}
} // namespace detail

double normal_quantile(double p) { return vec::normal_quantile(vec::D1{p}).v; }

double uniform_from_lattice(std::uint64_t v) {
  return vec::vuniform_from_lattice<vec::D1>(vec::U1{v}).v;
}

} // namespace oppsim::kern
