#include <arm_neon.h>

#include "nnfn/simd/kernels.hpp"

namespace nnfn::simd {
namespace {

double squared_distance_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float64x2_t d0 = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    acc0 = vaddq_f64(acc0, vmulq_f64(d0, d0));
    acc1 = vaddq_f64(acc1, vmulq_f64(d1, d1));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void blend_rows_neon(const double* y, const double* z, const double* a,
                     double* out, std::size_t n, double gram,
                     double half_rho) {
  const double denom = gram + half_rho;
  const float64x2_t vg = vdupq_n_f64(gram);
  const float64x2_t vh = vdupq_n_f64(half_rho);
  const float64x2_t vhalf = vdupq_n_f64(0.5);
  const float64x2_t vden = vdupq_n_f64(denom);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t num =
        vsubq_f64(vaddq_f64(vmulq_f64(vg, vld1q_f64(y + i)),
                            vmulq_f64(vh, vld1q_f64(z + i))),
                  vmulq_f64(vhalf, vld1q_f64(a + i)));
    vst1q_f64(out + i, vdivq_f64(num, vden));
  }
  for (; i < n; ++i) {
    out[i] = (gram * y[i] + half_rho * z[i] - 0.5 * a[i]) / denom;
  }
}

void multiplier_step_neon(double* a, const double* x, const double* z,
                          std::size_t n, double rho) {
  const float64x2_t vr = vdupq_n_f64(rho);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(x + i), vld1q_f64(z + i));
    vst1q_f64(a + i, vaddq_f64(vld1q_f64(a + i), vmulq_f64(vr, d)));
  }
  for (; i < n; ++i) a[i] += rho * (x[i] - z[i]);
}

}  // namespace

namespace detail {
const KernelTable kNeonKernels{squared_distance_neon, blend_rows_neon,
                               multiplier_step_neon};
}  // namespace detail

}  // namespace nnfn::simd
