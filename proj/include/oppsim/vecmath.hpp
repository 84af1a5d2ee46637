#pragma once
// Branch-free vector math templated over the lane types in vec.hpp.
//
// Two functions live here: a natural log (fdlibm decomposition) and the
// standard-normal quantile (Wichura's rational approximations, full double
// precision).  Both are written so that every lane executes the identical
// IEEE operation sequence on the scalar and AVX2 paths: branches are mask
// selects evaluated on both sides, fusion only happens through explicit
// vfma, and the log's hi/lo ln2 splitting uses plain mul/add (the build sets
// -ffp-contract=off so the compiler cannot fuse those).
//
// The quantile is the single normal-sampling routine of the whole artifact:
// threshold computation, the simulator's capacity draws, and the MIMO
// sampler all invert the same function, which is what makes integer-lattice
// exceedance cutoffs exactly equivalent to comparing sampled capacities
// against thresholds (see simulator.cpp).

#include "oppsim/vec.hpp"

#include <cstddef>
#include <cstdint>

namespace oppsim::vec {

template <class V>
inline V vbroadcast(double x) {
  if constexpr (V::width == 1) {
    return broadcast1(x);
  }
#ifdef OPPSIM_AVX2_TU
  else {
    return broadcast4(x);
  }
#endif
}

template <class V>
inline typename V::UInt vubroadcast(std::uint64_t x) {
  if constexpr (V::width == 1) {
    return ubroadcast1(x);
  }
#ifdef OPPSIM_AVX2_TU
  else {
    return ubroadcast4(x);
  }
#endif
}

template <class V, std::size_t N>
inline V horner(const double (&c)[N], V r) {
  V acc = vbroadcast<V>(c[N - 1]);
  for (std::size_t i = N - 1; i-- > 0;) {
    acc = vfma(acc, r, vbroadcast<V>(c[i]));
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Natural log for positive normal doubles (no subnormal/zero/inf handling:
// every caller feeds values in [2^-54, 2); preconditions asserted in tests).
// ---------------------------------------------------------------------------
template <class V>
inline V vlog(V x) {
  using U = typename V::UInt;
  const U bits = vbits(x);
  const U ebits = vshr(bits, 52);
  const U mant = (bits & vubroadcast<V>(0x000FFFFFFFFFFFFFull)) | vubroadcast<V>(0x3FF0000000000000ull);
  V m = vfrombits(mant); // [1, 2)

  // Normalize mantissa to [sqrt(2)/2, sqrt(2)).
  const U big = vgt(m, vbroadcast<V>(1.41421356237309515)); // > sqrt(2)
  m = vselect(big, m * vbroadcast<V>(0.5), m);
  const U eoff = vaddu(ebits, big & vubroadcast<V>(1));
  const V k = vsmallint_to_double(eoff) - vbroadcast<V>(1023.0);

  const V one = vbroadcast<V>(1.0);
  const V f = m - one;
  const V s = f / (vbroadcast<V>(2.0) + f);
  const V z = s * s;
  const V w = z * z;
  const V t1 = w * (vbroadcast<V>(3.999999999940941908e-01) +
                    w * (vbroadcast<V>(2.222219843214978396e-01) +
                         w * vbroadcast<V>(1.531383769920937332e-01)));
  const V t2 = z * (vbroadcast<V>(6.666666666666735130e-01) +
                    w * (vbroadcast<V>(2.857142874366239149e-01) +
                         w * (vbroadcast<V>(1.818357216161805012e-01) +
                              w * vbroadcast<V>(1.479819860511658591e-01))));
  const V R = t1 + t2;
  const V half = vbroadcast<V>(0.5);
  const V hfsq = half * f * f;

  const V ln2_hi = vbroadcast<V>(6.93147180369123816490e-01);
  const V ln2_lo = vbroadcast<V>(1.90821492927058770002e-10);
  // fdlibm grouping; plain mul/add so the hi/lo split survives.
  return k * ln2_hi - ((hfsq - (s * (hfsq + R) + k * ln2_lo)) - f);
}

// ---------------------------------------------------------------------------
// Standard-normal quantile (inverse CDF), full double precision.
// Relative error ~1e-15 over p in (0,1); validated against extended-precision
// oracles in tests/test_kernels.cpp.
// ---------------------------------------------------------------------------
namespace detail {
constexpr double kQA[8] = {3.3871328727963666080e0,  1.3314166789178437745e2,
                           1.9715909503065514427e3,  1.3731693765509461125e4,
                           4.5921953931549871457e4,  6.7265770927008700853e4,
                           3.3430575583588128105e4,  2.5090809287301226727e3};
constexpr double kQB[8] = {1.0,                      4.2313330701600911252e1,
                           6.8718700749205790830e2,  5.3941960214247511077e3,
                           2.1213794301586595867e4,  3.9307895800092710610e4,
                           2.8729085735721942674e4,  5.2264952788528545610e3};
constexpr double kQC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                           5.76949722146069140550e0,  3.64784832476320460504e0,
                           1.27045825245236838258e0,  2.41780725177450611770e-1,
                           2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kQD[8] = {1.0,                       2.05319162663775882187e0,
                           1.67638483018380384940e0,  6.89767334985100004550e-1,
                           1.48103976427480074590e-1, 1.51986665636164571966e-2,
                           5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr double kQE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                           1.78482653991729133580e0,  2.96560571828504891230e-1,
                           2.65321895265761230930e-2, 1.24266094738807843860e-3,
                           2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kQF[8] = {1.0,                       5.99832206555887937690e-1,
                           1.36929880922735805310e-1, 1.48753612908506148525e-2,
                           7.86869131145613259100e-4, 1.84631831751005468180e-5,
                           1.42151175831644588870e-7, 2.04426310338993978564e-15};
} // namespace detail

// Lattice value (integer in [0, 2^53)) -> uniform double in (0,1).
// Mirrors oppsim::uniform_from_bits exactly: the integer->double conversions
// are exact on both lane widths, and the remaining add/mul/clamp are the
// identical IEEE sequence.
template <class V>
inline V vuniform_from_lattice(typename V::UInt bits) {
  V d;
  if constexpr (V::width == 1) {
    d = V{static_cast<double>(bits.v)}; // exact, v < 2^53
  }
#ifdef OPPSIM_AVX2_TU
  else {
    // Split into two < 2^52 halves; hi*2^32 and the sum are exact.
    const auto hi = vshr(bits, 32);
    const auto lo = bits & vubroadcast<V>(0xFFFFFFFFull);
    d = vsmallint_to_double(hi) * vbroadcast<V>(0x1p32) + vsmallint_to_double(lo);
  }
#endif
  const V u = (d + vbroadcast<V>(0.5)) * vbroadcast<V>(0x1p-53);
  const V below_one = vbroadcast<V>(0x1.fffffffffffffp-1);
  return vselect(vlt(u, below_one), u, below_one);
}

template <class V>
inline V normal_quantile(V p) {
  using U = typename V::UInt;
  const V zero = vbroadcast<V>(0.0);
  const V one = vbroadcast<V>(1.0);
  const V q = p - vbroadcast<V>(0.5);

  // Central region |q| <= 0.425.
  const V absq = vfrombits(vandnot(vubroadcast<V>(0x8000000000000000ull), vbits(q)));
  const U central = vle(absq, vbroadcast<V>(0.425));
  const V rc = vbroadcast<V>(0.180625) - q * q;
  const V xc = q * horner(detail::kQA, rc) / horner(detail::kQB, rc);

  // Tail regions, driven by r = sqrt(-log(min(p, 1-p))).
  const U lower = vlt(q, zero);
  V pmin = vselect(lower, p, one - p);
  // Keep the tail path's log argument in vlog's normal-double range even for
  // central lanes (their tail result is discarded by the final select).
  pmin = vselect(vlt(pmin, vbroadcast<V>(1e-300)), vbroadcast<V>(1e-300), pmin);
  const V r = vsqrt(vneg(vlog(pmin)));

  const U near = vle(r, vbroadcast<V>(5.0));
  const V r1 = r - vbroadcast<V>(1.6);
  const V r2 = r - vbroadcast<V>(5.0);
  const V x1 = horner(detail::kQC, r1) / horner(detail::kQD, r1);
  const V x2 = horner(detail::kQE, r2) / horner(detail::kQF, r2);
  V xt = vselect(near, x1, x2);
  xt = vselect(lower, vneg(xt), xt);

  return vselect(central, xc, xt);
}

} // namespace oppsim::vec
