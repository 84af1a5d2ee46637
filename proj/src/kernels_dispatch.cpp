// Kernel variant selection.  Auto-detection picks AVX2 when the CPU has both
// avx2 and fma; OPPSIM_SIMD=scalar|avx2 overrides.  Forcing avx2 on a CPU
// without it is a configuration error and aborts rather than faulting later.

#include "oppsim/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace oppsim::kern {

namespace detail {
const Kernels& scalar_kernels();
const Kernels& avx2_kernels();
} // namespace detail

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

namespace {

Isa detect() {
  if (const char* env = std::getenv("OPPSIM_SIMD")) {
    if (std::strcmp(env, "scalar") == 0) return Isa::scalar;
    if (std::strcmp(env, "avx2") == 0) {
      if (!avx2_supported()) {
        std::fprintf(stderr, "oppsim: OPPSIM_SIMD=avx2 but this CPU lacks avx2+fma\n");
        std::exit(2);
      }
      return Isa::avx2;
    }
    std::fprintf(stderr, "oppsim: unknown OPPSIM_SIMD value '%s' (want scalar|avx2)\n", env);
    std::exit(2);
  }
  return avx2_supported() ? Isa::avx2 : Isa::scalar;
}

Isa g_isa;
bool g_selected = false;

} // namespace

Isa active_isa() {
  if (!g_selected) {
    g_isa = detect();
    g_selected = true;
  }
  return g_isa;
}

void force_isa(Isa isa) {
  g_isa = isa;
  g_selected = true;
}

const Kernels& kernels_for(Isa isa) {
  return isa == Isa::avx2 ? detail::avx2_kernels() : detail::scalar_kernels();
}

const Kernels& kernels() { return kernels_for(active_isa()); }

} // namespace oppsim::kern
