#include "strebm/simd.hpp"

#if defined(STREBM_HAVE_AVX2_KERNELS)

#include <immintrin.h>

#define STREBM_AVX2 __attribute__((target("avx2,fma")))

namespace strebm::simd::avx2 {
namespace {

STREBM_AVX2 inline double hsum(__m256d v) noexcept {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

// Transpose-and-add four accumulators into one vector of their sums.
STREBM_AVX2 inline __m256d hsum4(__m256d a0, __m256d a1, __m256d a2, __m256d a3) noexcept {
  const __m256d s01 = _mm256_hadd_pd(a0, a1);
  const __m256d s23 = _mm256_hadd_pd(a2, a3);
  const __m256d lo = _mm256_permute2f128_pd(s01, s23, 0x20);
  const __m256d hi = _mm256_permute2f128_pd(s01, s23, 0x31);
  return _mm256_add_pd(lo, hi);
}

}  // namespace

STREBM_AVX2 double dot(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  __m256d acc3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 16 <= n; i += 16) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    acc2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), acc2);
    acc3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), acc3);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(_mm256_add_pd(acc0, acc1), _mm256_add_pd(acc2, acc3)));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

STREBM_AVX2 void axpy(double alpha, const double* x, double* y, std::size_t n) noexcept {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i + 4,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4)));
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

STREBM_AVX2 double squared_distance(const double* a, const double* b, std::size_t n) noexcept {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

STREBM_AVX2 void dot4(const double* x, const double* const y[4], std::size_t n,
                      double out[4]) noexcept {
  const double* y0 = y[0];
  const double* y1 = y[1];
  const double* y2 = y[2];
  const double* y3 = y[3];
  __m256d a0 = _mm256_setzero_pd();
  __m256d a1 = _mm256_setzero_pd();
  __m256d a2 = _mm256_setzero_pd();
  __m256d a3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d xv = _mm256_loadu_pd(x + i);
    a0 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(y0 + i), a0);
    a1 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(y1 + i), a1);
    a2 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(y2 + i), a2);
    a3 = _mm256_fmadd_pd(xv, _mm256_loadu_pd(y3 + i), a3);
  }
  _mm256_storeu_pd(out, hsum4(a0, a1, a2, a3));
  for (; i < n; ++i) {
    const double xi = x[i];
    out[0] += xi * y0[i];
    out[1] += xi * y1[i];
    out[2] += xi * y2[i];
    out[3] += xi * y3[i];
  }
}

STREBM_AVX2 void dot2x4(const double* const x[2], const double* const y[4], std::size_t n,
                        double out[8]) noexcept {
  const double* x0 = x[0];
  const double* x1 = x[1];
  const double* y0 = y[0];
  const double* y1 = y[1];
  const double* y2 = y[2];
  const double* y3 = y[3];
  __m256d a00 = _mm256_setzero_pd(), a01 = _mm256_setzero_pd();
  __m256d a02 = _mm256_setzero_pd(), a03 = _mm256_setzero_pd();
  __m256d a10 = _mm256_setzero_pd(), a11 = _mm256_setzero_pd();
  __m256d a12 = _mm256_setzero_pd(), a13 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d u = _mm256_loadu_pd(x0 + i);
    const __m256d v = _mm256_loadu_pd(x1 + i);
    __m256d w = _mm256_loadu_pd(y0 + i);
    a00 = _mm256_fmadd_pd(u, w, a00);
    a10 = _mm256_fmadd_pd(v, w, a10);
    w = _mm256_loadu_pd(y1 + i);
    a01 = _mm256_fmadd_pd(u, w, a01);
    a11 = _mm256_fmadd_pd(v, w, a11);
    w = _mm256_loadu_pd(y2 + i);
    a02 = _mm256_fmadd_pd(u, w, a02);
    a12 = _mm256_fmadd_pd(v, w, a12);
    w = _mm256_loadu_pd(y3 + i);
    a03 = _mm256_fmadd_pd(u, w, a03);
    a13 = _mm256_fmadd_pd(v, w, a13);
  }
  _mm256_storeu_pd(out, hsum4(a00, a01, a02, a03));
  _mm256_storeu_pd(out + 4, hsum4(a10, a11, a12, a13));
  for (; i < n; ++i) {
    const double u = x0[i];
    const double v = x1[i];
    out[0] += u * y0[i];
    out[1] += u * y1[i];
    out[2] += u * y2[i];
    out[3] += u * y3[i];
    out[4] += v * y0[i];
    out[5] += v * y1[i];
    out[6] += v * y2[i];
    out[7] += v * y3[i];
  }
}

}  // namespace strebm::simd::avx2

#endif
