#include "nnfn/simd/kernels.hpp"

namespace nnfn::simd {
namespace {

double squared_distance_scalar(const double* a, const double* b,
                               std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void blend_rows_scalar(const double* y, const double* z, const double* a,
                       double* out, std::size_t n, double gram,
                       double half_rho) {
  const double denom = gram + half_rho;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = (gram * y[i] + half_rho * z[i] - 0.5 * a[i]) / denom;
  }
}

void multiplier_step_scalar(double* a, const double* x, const double* z,
                            std::size_t n, double rho) {
  for (std::size_t i = 0; i < n; ++i) a[i] += rho * (x[i] - z[i]);
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels{squared_distance_scalar, blend_rows_scalar,
                                 multiplier_step_scalar};
}  // namespace detail

}  // namespace nnfn::simd
