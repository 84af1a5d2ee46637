#pragma once
// Lane abstraction shared by the scalar reference kernels and the AVX2
// kernels.  The same templated math (vecmath.hpp) is instantiated over both
// lane types; every operation here maps to one IEEE operation per lane, with
// branches expressed as full-width mask selects on both paths, so the two
// instruction sets produce bit-identical doubles.
//
// The AVX2 type is only defined inside translation units compiled with
// -mavx2 -mfma (they define OPPSIM_AVX2_TU before including this header).

#include <bit>
#include <cmath>
#include <cstdint>

#ifdef OPPSIM_AVX2_TU
#include <immintrin.h>
#endif

namespace oppsim::vec {

// ---------------------------------------------------------------------------
// Scalar lane (the reference semantics).
// ---------------------------------------------------------------------------
struct U1 {
  std::uint64_t v;
};

struct D1 {
  double v;
  using UInt = U1;
  static constexpr int width = 1;
};

inline D1 broadcast1(double x) { return {x}; }
inline D1 load1(const double* p) { return {*p}; }
inline void store1(double* p, D1 a) { *p = a.v; }

inline D1 operator+(D1 a, D1 b) { return {a.v + b.v}; }
inline D1 operator-(D1 a, D1 b) { return {a.v - b.v}; }
inline D1 operator*(D1 a, D1 b) { return {a.v * b.v}; }
inline D1 operator/(D1 a, D1 b) { return {a.v / b.v}; }
inline D1 vsqrt(D1 a) { return {std::sqrt(a.v)}; }
inline D1 vfma(D1 a, D1 b, D1 c) { return {std::fma(a.v, b.v, c.v)}; }
inline D1 vneg(D1 a) { return {-a.v}; }

inline U1 vbits(D1 a) { return {std::bit_cast<std::uint64_t>(a.v)}; }
inline D1 vfrombits(U1 a) { return {std::bit_cast<double>(a.v)}; }

inline U1 operator&(U1 a, U1 b) { return {a.v & b.v}; }
inline U1 operator|(U1 a, U1 b) { return {a.v | b.v}; }
inline U1 operator^(U1 a, U1 b) { return {a.v ^ b.v}; }
inline U1 vandnot(U1 a, U1 b) { return {~a.v & b.v}; } // (~a) & b
inline U1 vshr(U1 a, int n) { return {a.v >> n}; }
inline U1 vshl(U1 a, int n) { return {a.v << n}; }
inline U1 vaddu(U1 a, U1 b) { return {a.v + b.v}; }
inline U1 vsubu(U1 a, U1 b) { return {a.v - b.v}; }
inline U1 ubroadcast1(std::uint64_t x) { return {x}; }

// Compares produce all-ones / all-zeros masks, like the AVX2 side.
inline U1 vlt(D1 a, D1 b) { return {a.v < b.v ? ~std::uint64_t{0} : 0}; }
inline U1 vle(D1 a, D1 b) { return {a.v <= b.v ? ~std::uint64_t{0} : 0}; }
inline U1 vgt(D1 a, D1 b) { return {a.v > b.v ? ~std::uint64_t{0} : 0}; }
inline U1 vge(D1 a, D1 b) { return {a.v >= b.v ? ~std::uint64_t{0} : 0}; }
// Unsigned 64-bit lane compare (values < 2^63 in practice).
inline U1 vgtu(U1 a, U1 b) { return {a.v > b.v ? ~std::uint64_t{0} : 0}; }

inline D1 vselect(U1 m, D1 a, D1 b) {
  return vfrombits((m & vbits(a)) | vandnot(m, vbits(b)));
}
inline U1 vselectu(U1 m, U1 a, U1 b) { return (m & a) | vandnot(m, b); }

// Exact conversion of small nonnegative integer lanes (< 2^52) to double.
inline D1 vsmallint_to_double(U1 a) {
  constexpr std::uint64_t magic = 0x4330000000000000ull; // 2^52
  return vfrombits(U1{a.v | magic}) - vfrombits(U1{magic});
}

#ifdef OPPSIM_AVX2_TU
// ---------------------------------------------------------------------------
// AVX2 lane: 4 doubles / 4 x 64-bit integers.
// ---------------------------------------------------------------------------
struct U4 {
  __m256i v;
};

struct D4 {
  __m256d v;
  using UInt = U4;
  static constexpr int width = 4;
};

inline D4 broadcast4(double x) { return {_mm256_set1_pd(x)}; }
inline D4 load4(const double* p) { return {_mm256_loadu_pd(p)}; }
inline void store4(double* p, D4 a) { _mm256_storeu_pd(p, a.v); }

inline D4 operator+(D4 a, D4 b) { return {_mm256_add_pd(a.v, b.v)}; }
inline D4 operator-(D4 a, D4 b) { return {_mm256_sub_pd(a.v, b.v)}; }
inline D4 operator*(D4 a, D4 b) { return {_mm256_mul_pd(a.v, b.v)}; }
inline D4 operator/(D4 a, D4 b) { return {_mm256_div_pd(a.v, b.v)}; }
inline D4 vsqrt(D4 a) { return {_mm256_sqrt_pd(a.v)}; }
inline D4 vfma(D4 a, D4 b, D4 c) { return {_mm256_fmadd_pd(a.v, b.v, c.v)}; }
inline D4 vneg(D4 a) {
  return {_mm256_xor_pd(a.v, _mm256_set1_pd(-0.0))};
}

inline U4 vbits(D4 a) { return {_mm256_castpd_si256(a.v)}; }
inline D4 vfrombits(U4 a) { return {_mm256_castsi256_pd(a.v)}; }

inline U4 operator&(U4 a, U4 b) { return {_mm256_and_si256(a.v, b.v)}; }
inline U4 operator|(U4 a, U4 b) { return {_mm256_or_si256(a.v, b.v)}; }
inline U4 operator^(U4 a, U4 b) { return {_mm256_xor_si256(a.v, b.v)}; }
inline U4 vandnot(U4 a, U4 b) { return {_mm256_andnot_si256(a.v, b.v)}; }
inline U4 vshr(U4 a, int n) { return {_mm256_srli_epi64(a.v, n)}; }
inline U4 vshl(U4 a, int n) { return {_mm256_slli_epi64(a.v, n)}; }
inline U4 vaddu(U4 a, U4 b) { return {_mm256_add_epi64(a.v, b.v)}; }
inline U4 vsubu(U4 a, U4 b) { return {_mm256_sub_epi64(a.v, b.v)}; }
inline U4 ubroadcast4(std::uint64_t x) {
  return {_mm256_set1_epi64x(static_cast<long long>(x))};
}

inline U4 vlt(D4 a, D4 b) { return {_mm256_castpd_si256(_mm256_cmp_pd(a.v, b.v, _CMP_LT_OQ))}; }
inline U4 vle(D4 a, D4 b) { return {_mm256_castpd_si256(_mm256_cmp_pd(a.v, b.v, _CMP_LE_OQ))}; }
inline U4 vgt(D4 a, D4 b) { return {_mm256_castpd_si256(_mm256_cmp_pd(a.v, b.v, _CMP_GT_OQ))}; }
inline U4 vge(D4 a, D4 b) { return {_mm256_castpd_si256(_mm256_cmp_pd(a.v, b.v, _CMP_GE_OQ))}; }
// Signed 64-bit compare is fine: all lattice/exponent values are < 2^62.
inline U4 vgtu(U4 a, U4 b) { return {_mm256_cmpgt_epi64(a.v, b.v)}; }

inline D4 vselect(U4 m, D4 a, D4 b) {
  return vfrombits((m & vbits(a)) | vandnot(m, vbits(b)));
}
inline U4 vselectu(U4 m, U4 a, U4 b) { return (m & a) | vandnot(m, b); }

inline D4 vsmallint_to_double(U4 a) {
  const __m256i magic = _mm256_set1_epi64x(0x4330000000000000ll);
  return {_mm256_sub_pd(_mm256_castsi256_pd(_mm256_or_si256(a.v, magic)),
                        _mm256_castsi256_pd(magic))};
}
#endif // OPPSIM_AVX2_TU

} // namespace oppsim::vec
