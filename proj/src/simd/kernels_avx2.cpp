// Built with -mavx2 (no FMA: element-wise results must match the scalar
// reference bit for bit).
#include <immintrin.h>

#include "nnfn/simd/kernels.hpp"

#if !defined(__AVX2__)
#error "kernels_avx2.cpp must be compiled with -mavx2"
#endif

namespace nnfn::simd {
namespace {

double squared_distance_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 =
        _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_mul_pd(d1, d1));
  }
  if (i + 4 <= n) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_add_pd(acc0, _mm256_mul_pd(d0, d0));
    i += 4;
  }
  acc0 = _mm256_add_pd(acc0, acc1);
  const __m128d lo = _mm256_castpd256_pd128(acc0);
  const __m128d hi = _mm256_extractf128_pd(acc0, 1);
  const __m128d pair = _mm_add_pd(lo, hi);
  double acc = _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void blend_rows_avx2(const double* y, const double* z, const double* a,
                     double* out, std::size_t n, double gram,
                     double half_rho) {
  const double denom = gram + half_rho;
  const __m256d vg = _mm256_set1_pd(gram);
  const __m256d vh = _mm256_set1_pd(half_rho);
  const __m256d vhalf = _mm256_set1_pd(0.5);
  const __m256d vden = _mm256_set1_pd(denom);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d num = _mm256_sub_pd(
        _mm256_add_pd(_mm256_mul_pd(vg, _mm256_loadu_pd(y + i)),
                      _mm256_mul_pd(vh, _mm256_loadu_pd(z + i))),
        _mm256_mul_pd(vhalf, _mm256_loadu_pd(a + i)));
    _mm256_storeu_pd(out + i, _mm256_div_pd(num, vden));
  }
  for (; i < n; ++i) {
    out[i] = (gram * y[i] + half_rho * z[i] - 0.5 * a[i]) / denom;
  }
}

void multiplier_step_avx2(double* a, const double* x, const double* z,
                          std::size_t n, double rho) {
  const __m256d vr = _mm256_set1_pd(rho);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(z + i));
    _mm256_storeu_pd(a + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_mul_pd(vr, d)));
  }
  for (; i < n; ++i) a[i] += rho * (x[i] - z[i]);
}

}  // namespace

namespace detail {
const KernelTable kAvx2Kernels{squared_distance_avx2, blend_rows_avx2,
                               multiplier_step_avx2};
}  // namespace detail

}  // namespace nnfn::simd
