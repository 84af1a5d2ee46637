// AVX2 variant of the compute kernels: four Philox blocks per iteration in
// SoA form (one counter word per 64-bit lane), and four quantile lanes per
// iteration for bulk normals.  Tails run the scalar lane type from this same
// translation unit; with -ffp-contract=off its operation sequence is the one
// the reference variant executes, so results stay bit-identical (asserted in
// tests/test_kernels.cpp).

#define OPPSIM_AVX2_TU
#include "oppsim/kernels.hpp"
#include "oppsim/vecmath.hpp"

#include <immintrin.h>

#include <algorithm>

namespace oppsim::kern {

namespace {

// Four independent Philox4x32-10 blocks with counters
// (slot_lo, slot_hi, base + {0,1,2,3}, tag); each lane's value lives in the
// low 32 bits of a 64-bit element.  Writes the blocks' lattice pairs
// interleaved, exactly like the scalar layout.
inline void philox4_lattice(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                            std::uint64_t base_block, std::uint64_t* out) {
  const __m256i mask32 = _mm256_set1_epi64x(0xFFFFFFFFll);
  const __m256i m0 = _mm256_set1_epi64x(static_cast<long long>(oppsim::detail::kPhiloxM0));
  const __m256i m1 = _mm256_set1_epi64x(static_cast<long long>(oppsim::detail::kPhiloxM1));
  const __m256i w0 = _mm256_set1_epi64x(static_cast<long long>(oppsim::detail::kPhiloxW0));
  const __m256i w1 = _mm256_set1_epi64x(static_cast<long long>(oppsim::detail::kPhiloxW1));

  __m256i x0 = _mm256_set1_epi64x(static_cast<long long>(slot & 0xFFFFFFFFull));
  __m256i x1 = _mm256_set1_epi64x(static_cast<long long>(slot >> 32));
  __m256i x2 = _mm256_add_epi64(
      _mm256_set1_epi64x(static_cast<long long>(base_block & 0xFFFFFFFFull)),
      _mm256_set_epi64x(3, 2, 1, 0));
  x2 = _mm256_and_si256(x2, mask32);
  __m256i x3 = _mm256_set1_epi64x(static_cast<long long>(static_cast<std::uint32_t>(tag)));
  __m256i k0 = _mm256_set1_epi64x(static_cast<long long>(seed & 0xFFFFFFFFull));
  __m256i k1 = _mm256_set1_epi64x(static_cast<long long>(seed >> 32));

  for (int r = 0; r < 10; ++r) {
    const __m256i p0 = _mm256_mul_epu32(x0, m0); // low 32 bits of each lane
    const __m256i p1 = _mm256_mul_epu32(x2, m1);
    const __m256i hi0 = _mm256_srli_epi64(p0, 32);
    const __m256i lo0 = _mm256_and_si256(p0, mask32);
    const __m256i hi1 = _mm256_srli_epi64(p1, 32);
    const __m256i lo1 = _mm256_and_si256(p1, mask32);
    x0 = _mm256_xor_si256(_mm256_xor_si256(hi1, x1), k0);
    x1 = lo1;
    x2 = _mm256_xor_si256(_mm256_xor_si256(hi0, x3), k1);
    x3 = lo0;
    k0 = _mm256_and_si256(_mm256_add_epi64(k0, w0), mask32); // u32 wrap
    k1 = _mm256_and_si256(_mm256_add_epi64(k1, w1), mask32);
  }

  const __m256i lo64 = _mm256_or_si256(x0, _mm256_slli_epi64(x1, 32));
  const __m256i hi64 = _mm256_or_si256(x2, _mm256_slli_epi64(x3, 32));
  const __m256i vlo = _mm256_srli_epi64(lo64, 11);
  const __m256i vhi = _mm256_srli_epi64(hi64, 11);

  // {l0,h0,l1,h1} and {l2,h2,l3,h3}
  const __m256i unlo = _mm256_unpacklo_epi64(vlo, vhi); // l0,h0,l2,h2
  const __m256i unhi = _mm256_unpackhi_epi64(vlo, vhi); // l1,h1,l3,h3
  const __m256i r0 = _mm256_permute2x128_si256(unlo, unhi, 0x20);
  const __m256i r1 = _mm256_permute2x128_si256(unlo, unhi, 0x31);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out), r0);
  _mm256_storeu_si256(reinterpret_cast<__m256i*>(out + 4), r1);
}

void fill_lattice_avx2(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                       std::uint32_t base_block, std::size_t nblocks, std::uint64_t* out) {
  std::size_t j = 0;
  for (; j + 4 <= nblocks; j += 4) {
    philox4_lattice(seed, slot, tag, base_block + j, out + 2 * j);
  }
  for (; j < nblocks; ++j) {
    const LatticePair lp =
        philox_lattice(seed, slot, static_cast<std::uint32_t>(base_block + j), tag);
    out[2 * j] = lp.v0;
    out[2 * j + 1] = lp.v1;
  }
}

void fill_normals_avx2(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                       std::uint32_t base_block, std::size_t n, double* out) {
  using vec::D1;
  using vec::D4;
  using vec::U1;
  using vec::U4;
  constexpr std::size_t kChunkBlocks = 1024; // 2048 values per chunk
  alignas(32) std::uint64_t lat[2 * kChunkBlocks];

  std::size_t produced = 0;
  std::uint32_t block = base_block;
  while (produced < n) {
    const std::size_t want = n - produced;
    const std::size_t blocks = std::min(kChunkBlocks, (want + 1) / 2);
    const std::size_t values = std::min(want, 2 * blocks);
    fill_lattice_avx2(seed, slot, tag, block, blocks, lat);

    std::size_t i = 0;
    for (; i + 4 <= values; i += 4) {
      const U4 bits{_mm256_loadu_si256(reinterpret_cast<const __m256i*>(lat + i))};
      const D4 u = vec::vuniform_from_lattice<D4>(bits);
      vec::store4(out + produced + i, vec::normal_quantile(u));
    }
    for (; i < values; ++i) {
      const D1 u = vec::vuniform_from_lattice<D1>(U1{lat[i]});
      out[produced + i] = vec::normal_quantile(u).v;
    }

    produced += values;
    block += static_cast<std::uint32_t>(blocks);
  }
}

} // namespace

namespace detail {
const Kernels& avx2_kernels() {
  static const Kernels k{&fill_lattice_avx2, &fill_normals_avx2, "avx2"};
  return k;
}
} // namespace detail

} // namespace oppsim::kern
