#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "nnfn/image.hpp"
#include "nnfn/linalg.hpp"

namespace nnfn {

/// Per-channel AWGN standard deviations in pixel units.
class ChannelNoise {
 public:
  /// Throws InvalidParameter unless all three are finite and > 0.
  ChannelNoise(double sigma_r, double sigma_g, double sigma_b);

  double r() const { return sigma_[0]; }
  double g() const { return sigma_[1]; }
  double b() const { return sigma_[2]; }
  double operator[](int c) const { return sigma_[c]; }
  const std::array<double, 3>& sigmas() const { return sigma_; }

  friend bool operator==(const ChannelNoise&, const ChannelNoise&) = default;

 private:
  std::array<double, 3> sigma_;
};

/// Block-diagonal W = diag(σ_r⁻¹ I, σ_g⁻¹ I, σ_b⁻¹ I) with p² x p² identity
/// blocks, stored as three scalars.
class WeightMatrix {
 public:
  WeightMatrix(std::array<double, 3> inverse_sigmas, int block_size);

  const std::array<double, 3>& inverse_sigmas() const { return inv_; }
  int block_size() const { return block_; }
  int rows() const { return 3 * block_; }

  /// Squared weight of row block c, i.e. the diagonal of WᵀW there.
  double gram(int c) const { return inv_[c] * inv_[c]; }
  double mean_gram() const;

  /// W * m. m must have 3 * block_size rows.
  Matrix apply(const Matrix& m) const;
  /// WᵀW * m.
  Matrix apply_gram(const Matrix& m) const;
  /// Explicit 3p² x 3p² matrix, for tests and small diagnostics.
  Matrix dense() const;

 private:
  void check_rows(const Matrix& m) const;

  std::array<double, 3> inv_;
  int block_;
};

/// Throws InvalidParameter for p < 1.
WeightMatrix make_weight_matrix(const ChannelNoise& noise, int p);

/// Identifier of the noise generator, recorded in reports.
inline constexpr std::string_view kRngAlgorithm = "splitmix64-boxmuller-v1";

/// Standard normal deviate addressed by (seed, stream, index). Pure function
/// of its arguments, so any partitioning of the work reproduces the same field.
double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index);

/// image + independent N(0, σ_c²) per channel; not clipped.
ColorImage add_awgn(const ColorImage& image, const ChannelNoise& noise,
                    std::uint64_t seed);

inline constexpr double kMinEstimatedSigma = 1e-3;

/// Approximate per-channel σ from the median absolute deviation of a 3x3
/// Laplacian-difference residual. Needs at least 16 x 16 pixels.
ChannelNoise estimate_noise_mad(const ColorImage& image);

}  // namespace nnfn
