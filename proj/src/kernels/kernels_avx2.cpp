// AVX2+FMA kernel lane. Compiled with -mavx2 -mfma; selected at runtime only
// when the CPU reports both features.

#include <immintrin.h>

#include <cmath>
#include <cstddef>
#include <limits>

namespace barankin::kernels::avx2 {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  const __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

// exp on four lanes: x = k*ln2 + r with |r| <= ln2/2, exp(x) = 2^k * exp(r).
// exp(r) by a degree-13 Taylor polynomial (truncation ~4e-18 at the edge of
// the reduced interval). The 2^k scaling is split into two halves so the
// k = 1024 overflow edge and the gradual-underflow range stay representable.
inline __m256d exp_pd(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634074);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d overflow_x = _mm256_set1_pd(709.782712893384);
  const __m256d underflow_x = _mm256_set1_pd(-745.1332191019412);

  const __m256d k = _mm256_round_pd(
      _mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(k, ln2_hi, x);
  r = _mm256_fnmadd_pd(k, ln2_lo, r);

  __m256d p = _mm256_set1_pd(1.60590438368216145994e-10);  // 1/13!
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.08767569878680989792e-9));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.50521083854417187751e-8));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.75573192239858906526e-7));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.75573192239858906526e-6));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(2.48015873015873015873e-5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.98412698412698412698e-4));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.38888888888888888889e-3));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(8.33333333333333333333e-3));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(4.16666666666666666667e-2));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.66666666666666666667e-1));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  const __m256d r2 = _mm256_mul_pd(r, r);
  const __m256d er = _mm256_add_pd(_mm256_add_pd(_mm256_set1_pd(1.0), r),
                                   _mm256_mul_pd(r2, p));

  // 2^k = 2^k1 * 2^k2, k1 = k >> 1 (no 64-bit arithmetic shift in AVX2,
  // so split while still in 32 bits).
  const __m128i k32 = _mm256_cvtpd_epi32(k);
  const __m128i k1_32 = _mm_srai_epi32(k32, 1);
  const __m128i k2_32 = _mm_sub_epi32(k32, k1_32);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256i e1 =
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(k1_32), bias), 52);
  const __m256i e2 =
      _mm256_slli_epi64(_mm256_add_epi64(_mm256_cvtepi32_epi64(k2_32), bias), 52);
  __m256d res = _mm256_mul_pd(
      _mm256_mul_pd(er, _mm256_castsi256_pd(e1)), _mm256_castsi256_pd(e2));

  const __m256d inf =
      _mm256_set1_pd(std::numeric_limits<double>::infinity());
  const __m256d over = _mm256_cmp_pd(x, overflow_x, _CMP_GT_OQ);
  const __m256d under = _mm256_cmp_pd(x, underflow_x, _CMP_LT_OQ);
  const __m256d unord = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);
  res = _mm256_blendv_pd(res, inf, over);
  res = _mm256_blendv_pd(res, _mm256_setzero_pd(), under);
  res = _mm256_blendv_pd(res, x, unord);
  return res;
}

}  // namespace

double sum(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i];
  return acc;
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4),
                           _mm256_loadu_pd(y + i + 4), acc1);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void exp_inplace(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, exp_pd(_mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] = std::exp(x[i]);
}

void exp_affine(double* out, const double* s, double a, double b,
                std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d z = _mm256_fmadd_pd(va, _mm256_loadu_pd(s + i), vb);
    _mm256_storeu_pd(out + i, exp_pd(z));
  }
  for (; i < n; ++i) out[i] = std::exp(a * s[i] + b);
}

}  // namespace barankin::kernels::avx2
