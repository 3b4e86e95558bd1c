#include <atomic>
#include <string>

#include "nnfn/errors.hpp"
#include "nnfn/simd/kernels.hpp"

namespace nnfn::simd {

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
    case Isa::neon: return "neon";
  }
  return "unknown";
}

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if (defined(__x86_64__) || defined(_M_X64)) && defined(__GNUC__)
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
    case Isa::neon:
#if defined(__aarch64__)
      return true;  // mandatory on AArch64
#else
      return false;
#endif
  }
  return false;
}

std::vector<Isa> supported_isas() {
  std::vector<Isa> out;
  for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon}) {
    if (isa_supported(isa)) out.push_back(isa);
  }
  return out;
}

Isa detect_isa() {
  if (isa_supported(Isa::avx2)) return Isa::avx2;
  if (isa_supported(Isa::neon)) return Isa::neon;
  return Isa::scalar;
}

const KernelTable& kernels(Isa isa) {
  switch (isa) {
#if defined(__x86_64__) || defined(_M_X64)
    case Isa::avx2:
      if (isa_supported(isa)) return detail::kAvx2Kernels;
      break;
#endif
#if defined(__aarch64__)
    case Isa::neon:
      return detail::kNeonKernels;
#endif
    case Isa::scalar:
      return detail::kScalarKernels;
    default:
      break;
  }
  throw InvalidParameter("ISA " + std::string(isa_name(isa)) +
                         " is not available on this CPU");
}

namespace {

std::atomic<const KernelTable*>& active_table() {
  static std::atomic<const KernelTable*> table{&kernels(detect_isa())};
  return table;
}

std::atomic<Isa>& active_isa_slot() {
  static std::atomic<Isa> isa{detect_isa()};
  return isa;
}

}  // namespace

const KernelTable& kernels() {
  return *active_table().load(std::memory_order_relaxed);
}

Isa active_isa() { return active_isa_slot().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  const KernelTable& table = kernels(isa);
  active_table().store(&table, std::memory_order_relaxed);
  active_isa_slot().store(isa, std::memory_order_relaxed);
}

}  // namespace nnfn::simd
