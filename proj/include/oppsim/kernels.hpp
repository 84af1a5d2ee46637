#pragma once
// Runtime-dispatched compute kernels.
//
// Two kernel families exist in a scalar reference variant and an AVX2
// variant: bulk Philox lattice generation (integer work) and bulk
// standard-normal generation (lattice -> uniform -> quantile).  The variants
// are bit-identical by construction and the equivalence is asserted by
// tests; the active variant is chosen once per process from the CPU's
// capabilities, overridable with OPPSIM_SIMD=scalar|avx2.

#include "oppsim/philox.hpp"

#include <cstddef>
#include <cstdint>

namespace oppsim::kern {

enum class Isa { scalar, avx2 };

const char* isa_name(Isa isa);
bool avx2_supported();

// The selected ISA (env override consulted on first use).
Isa active_isa();
// Test hook: force a variant for subsequent kernels() calls.  Not safe while
// another thread is simulating; tests call it between runs only.
void force_isa(Isa isa);

struct Kernels {
  // Writes the two 53-bit lattice values of each Philox block base_block+j,
  // j in [0, nblocks): out[2j] and out[2j+1].
  void (*fill_lattice)(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                       std::uint32_t base_block, std::size_t nblocks, std::uint64_t* out);
  // Writes n standard-normal draws; draw i comes from block base_block + i/2,
  // word i%2, mapped through the shared uniform->quantile chain.
  void (*fill_normals)(std::uint64_t seed, std::uint64_t slot, StreamTag tag,
                       std::uint32_t base_block, std::size_t n, double* out);
  const char* name;
};

const Kernels& kernels();
const Kernels& kernels_for(Isa isa);

// Single-value helpers on the scalar lane.  These are compiled once, in the
// baseline-ISA translation unit, so every build and every OPPSIM_SIMD setting
// produces the same doubles (winner capacities, thresholds, cutoffs).
double normal_quantile(double p); // p in (0,1)
double uniform_from_lattice(std::uint64_t v);

} // namespace oppsim::kern
