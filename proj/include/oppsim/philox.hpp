#pragma once
// Philox4x32-10 counter-based RNG and the stream-derivation rule used by the
// whole simulator.  Counter-based generation is what makes parallel and
// serial runs agree: any (seed, slot, index, tag) coordinate can be evaluated
// independently, in any order, on any thread.
//
// Stream layout (fixed; changing it changes every simulation result):
//   key     = (seed & 0xffffffff, seed >> 32)
//   counter = (slot_lo32, slot_hi32, index, tag)
// One block yields 4x u32, combined as two 64-bit words
//   lo = x0 | x1<<32,  hi = x2 | x3<<32,
// and each word maps to one double in (0,1) via (((w >> 11) + 0.5) * 2^-53),
// clamped below 1 (see uniform_from_bits).

#include <array>
#include <cstdint>

namespace oppsim {

// Purpose of each substream, placed in the counter's fourth word so streams
// for different uses can never collide.
enum class StreamTag : std::uint32_t {
  capacity = 0,  // per-slot user capacity draws; index = user pair
  mimo = 1,      // MIMO channel matrix entries; slot = sample index
  reservoir = 2, // reservoir-sampling keys; index = user
  profile = 3,   // profile generation; slot = 0, index = user
};

struct PhiloxBlock {
  std::uint32_t x0, x1, x2, x3;
};

namespace detail {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

constexpr void philox_round(std::uint32_t& x0, std::uint32_t& x1, std::uint32_t& x2,
                            std::uint32_t& x3, std::uint32_t k0, std::uint32_t k1) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kPhiloxM0) * x0;
  const std::uint64_t p1 = static_cast<std::uint64_t>(kPhiloxM1) * x2;
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x0 = hi1 ^ x1 ^ k0;
  x1 = lo1;
  x2 = hi0 ^ x3 ^ k1;
  x3 = lo0;
}

} // namespace detail

// One Philox4x32 block with 10 rounds.  Matches the reference test vectors
// (see tests/test_kernels.cpp).
constexpr PhiloxBlock philox_block(std::uint32_t c0, std::uint32_t c1, std::uint32_t c2,
                                   std::uint32_t c3, std::uint32_t k0, std::uint32_t k1) {
  std::uint32_t x0 = c0, x1 = c1, x2 = c2, x3 = c3;
  for (int r = 0; r < 10; ++r) {
    detail::philox_round(x0, x1, x2, x3, k0, k1);
    k0 += detail::kPhiloxW0;
    k1 += detail::kPhiloxW1;
  }
  return PhiloxBlock{x0, x1, x2, x3};
}

// Block at a stream coordinate.
constexpr PhiloxBlock philox_at(std::uint64_t seed, std::uint64_t slot, std::uint32_t index,
                                StreamTag tag) {
  return philox_block(static_cast<std::uint32_t>(slot), static_cast<std::uint32_t>(slot >> 32),
                      index, static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(seed),
                      static_cast<std::uint32_t>(seed >> 32));
}

// The two 64-bit words of a block, already shifted down to the 53-bit
// uniform lattice.  Exceedance tests compare these raw lattice values against
// precomputed integer cutoffs; doubles are materialized only when a capacity
// value is actually needed.
struct LatticePair {
  std::uint64_t v0, v1; // each in [0, 2^53)
};

constexpr LatticePair philox_lattice(std::uint64_t seed, std::uint64_t slot, std::uint32_t index,
                                     StreamTag tag) {
  const PhiloxBlock b = philox_at(seed, slot, index, tag);
  const std::uint64_t lo = static_cast<std::uint64_t>(b.x0) | (static_cast<std::uint64_t>(b.x1) << 32);
  const std::uint64_t hi = static_cast<std::uint64_t>(b.x2) | (static_cast<std::uint64_t>(b.x3) << 32);
  return LatticePair{lo >> 11, hi >> 11};
}

// Map a 53-bit lattice value to a uniform double in (0, 1).
//
// ((double)v + 0.5) rounds for v >= 2^52 (54 bits would be needed); that
// rounding is part of the fixed definition.  The clamp removes the single
// lattice point v = 2^53-1 whose rounded image is exactly 1.0, which would
// otherwise map through the quantile to +inf.
inline double uniform_from_bits(std::uint64_t v) {
  constexpr double kScale = 0x1p-53;
  constexpr double kBelowOne = 0x1.fffffffffffffp-1;
  const double u = (static_cast<double>(v) + 0.5) * kScale;
  return u < kBelowOne ? u : kBelowOne;
}

// Number of 53-bit lattice points strictly above an integer cutoff, as an
// exact exceedance probability.  Used by tests that want the cutoff's true
// probability rather than the Gaussian survival it approximates.
constexpr double lattice_tail_probability(std::int64_t cutoff) {
  if (cutoff < 0) return 1.0;
  const std::uint64_t points = cutoff >= (std::int64_t{1} << 53)
                                   ? 0
                                   : (std::uint64_t{1} << 53) - 1 - static_cast<std::uint64_t>(cutoff);
  return static_cast<double>(points) * 0x1p-53;
}

} // namespace oppsim
