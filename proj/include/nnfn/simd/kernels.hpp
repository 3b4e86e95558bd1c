#pragma once

// Data-parallel inner loops with a scalar reference and vector variants.
//
// The scalar table is the reference. Element-wise kernels (blend_rows,
// multiplier_step) give bit-identical results on every ISA; squared_distance
// reassociates the sum and agrees to rounding. The active table is chosen once
// from CPUID at first use and can be overridden for testing.

#include <cstddef>
#include <string_view>
#include <vector>

namespace nnfn::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  /// sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
  /// out[i] = (gram * y[i] + half_rho * z[i] - 0.5 * a[i]) / (gram + half_rho)
  void (*blend_rows)(const double* y, const double* z, const double* a,
                     double* out, std::size_t n, double gram, double half_rho);
  /// a[i] += rho * (x[i] - z[i])
  void (*multiplier_step)(double* a, const double* x, const double* z,
                          std::size_t n, double rho);
};

std::string_view isa_name(Isa isa);
bool isa_supported(Isa isa);
std::vector<Isa> supported_isas();

/// Best ISA the running CPU supports.
Isa detect_isa();
Isa active_isa();
/// Throws InvalidParameter if the CPU lacks the ISA.
void set_active_isa(Isa isa);

const KernelTable& kernels(Isa isa);
const KernelTable& kernels();

inline double squared_distance(const double* a, const double* b,
                               std::size_t n) {
  return kernels().squared_distance(a, b, n);
}

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(__x86_64__) || defined(_M_X64)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(__aarch64__)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace nnfn::simd
