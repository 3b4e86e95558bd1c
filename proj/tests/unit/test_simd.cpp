#include <random>
#include <vector>

#include "doctest.h"
#include "nnfn/errors.hpp"
#include "nnfn/simd/kernels.hpp"

using namespace nnfn;

namespace {

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

}  // namespace

TEST_SUITE("simd") {
  TEST_CASE("scalar is always available and detection picks a supported ISA") {
    CHECK(simd::isa_supported(simd::Isa::scalar));
    CHECK(simd::isa_supported(simd::detect_isa()));
    const auto all = simd::supported_isas();
    CHECK(all.front() == simd::Isa::scalar);
    CHECK(simd::isa_name(simd::Isa::avx2) == "avx2");
  }

  TEST_CASE("unsupported ISAs cannot be activated") {
    for (auto isa : {simd::Isa::avx2, simd::Isa::neon}) {
      if (!simd::isa_supported(isa)) {
        CHECK_THROWS_AS(simd::set_active_isa(isa), InvalidParameter);
      }
    }
  }

  TEST_CASE("every ISA agrees with the scalar reference") {
    std::mt19937_64 rng(1);
    const auto& ref = simd::kernels(simd::Isa::scalar);
    for (auto isa : simd::supported_isas()) {
      CAPTURE(simd::isa_name(isa));
      const auto& k = simd::kernels(isa);
      // Lengths around every vector width and remainder.
      for (std::size_t n : {0u, 1u, 2u, 3u, 4u, 5u, 7u, 8u, 9u, 15u, 16u, 17u, 18u, 36u, 108u, 1001u}) {
        const auto a = random_vector(n, rng);
        const auto b = random_vector(n, rng);
        const auto c = random_vector(n, rng);
        const double d_ref = ref.squared_distance(a.data(), b.data(), n);
        const double d = k.squared_distance(a.data(), b.data(), n);
        CHECK(d == doctest::Approx(d_ref).epsilon(1e-13));

        std::vector<double> out_ref(n);
        std::vector<double> out(n);
        ref.blend_rows(a.data(), b.data(), c.data(), out_ref.data(), n, 1.0 / 900.0, 0.37);
        k.blend_rows(a.data(), b.data(), c.data(), out.data(), n, 1.0 / 900.0, 0.37);
        CHECK(out == out_ref);

        std::vector<double> acc_ref = c;
        std::vector<double> acc = c;
        ref.multiplier_step(acc_ref.data(), a.data(), b.data(), n, 1.7);
        k.multiplier_step(acc.data(), a.data(), b.data(), n, 1.7);
        CHECK(acc == acc_ref);
      }
    }
  }

  TEST_CASE("switching the active ISA") {
    const auto before = simd::active_isa();
    simd::set_active_isa(simd::Isa::scalar);
    CHECK(simd::active_isa() == simd::Isa::scalar);
    CHECK(&simd::kernels() == &simd::kernels(simd::Isa::scalar));
    simd::set_active_isa(before);
    CHECK(simd::active_isa() == before);
  }
}
