#include "nnfn/noise_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "nnfn/errors.hpp"

namespace nnfn {

ChannelNoise::ChannelNoise(double sigma_r, double sigma_g, double sigma_b)
    : sigma_{sigma_r, sigma_g, sigma_b} {
  for (double s : sigma_) {
    if (!std::isfinite(s) || s <= 0.0) {
      throw InvalidParameter("noise sigma must be finite and > 0, got " +
                             std::to_string(s));
    }
  }
}

WeightMatrix::WeightMatrix(std::array<double, 3> inverse_sigmas, int block_size)
    : inv_(inverse_sigmas), block_(block_size) {
  if (block_size < 1) throw InvalidParameter("weight block size must be >= 1");
  for (double v : inv_) {
    if (!std::isfinite(v) || v <= 0.0) {
      throw InvalidParameter("inverse sigma must be finite and > 0");
    }
  }
}

double WeightMatrix::mean_gram() const {
  return (gram(0) + gram(1) + gram(2)) / 3.0;
}

void WeightMatrix::check_rows(const Matrix& m) const {
  if (m.rows() != rows()) {
    throw InvalidParameter("matrix has " + std::to_string(m.rows()) +
                           " rows, weight matrix expects " +
                           std::to_string(rows()));
  }
}

Matrix WeightMatrix::apply(const Matrix& m) const {
  check_rows(m);
  Matrix out(m.rows(), m.cols());
  for (int c = 0; c < 3; ++c) {
    out.middleRows(c * block_, block_) = inv_[c] * m.middleRows(c * block_, block_);
  }
  return out;
}

Matrix WeightMatrix::apply_gram(const Matrix& m) const {
  check_rows(m);
  Matrix out(m.rows(), m.cols());
  for (int c = 0; c < 3; ++c) {
    out.middleRows(c * block_, block_) = gram(c) * m.middleRows(c * block_, block_);
  }
  return out;
}

Matrix WeightMatrix::dense() const {
  Matrix w = Matrix::Zero(rows(), rows());
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < block_; ++i) w(c * block_ + i, c * block_ + i) = inv_[c];
  }
  return w;
}

WeightMatrix make_weight_matrix(const ChannelNoise& noise, int p) {
  if (p < 1) throw InvalidParameter("patch size must be >= 1");
  return WeightMatrix({1.0 / noise.r(), 1.0 / noise.g(), 1.0 / noise.b()},
                      p * p);
}

namespace {

constexpr std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

double counter_normal(std::uint64_t seed, std::uint64_t stream,
                      std::uint64_t index) {
  const std::uint64_t h1 = splitmix(splitmix(splitmix(seed) ^ stream) ^ index);
  const std::uint64_t h2 = splitmix(h1);
  constexpr double kUnit = 0x1.0p-53;
  const double u1 = static_cast<double>((h1 >> 11) + 1) * kUnit;  // (0, 1]
  const double u2 = static_cast<double>(h2 >> 11) * kUnit;        // [0, 1)
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

ColorImage add_awgn(const ColorImage& image, const ChannelNoise& noise,
                    std::uint64_t seed) {
  if (!image.all_finite()) throw InvalidParameter("image has non-finite values");
  ColorImage out = image;
  auto data = out.data();
  const std::size_t pixels = data.size() / kChannels;
  for (std::size_t px = 0; px < pixels; ++px) {
    for (int c = 0; c < kChannels; ++c) {
      data[px * kChannels + c] += noise[c] * counter_normal(seed, c, px);
    }
  }
  return out;
}

ChannelNoise estimate_noise_mad(const ColorImage& image) {
  if (image.height() < 16 || image.width() < 16) {
    throw InvalidParameter("noise estimation needs an image of at least 16x16");
  }
  // Difference of two Laplacians; annihilates locally planar intensity.
  constexpr double kKernel[3][3] = {{1, -2, 1}, {-2, 4, -2}, {1, -2, 1}};
  constexpr double kGain = 6.0;  // sqrt(sum of squared taps)
  constexpr double kMadToSigma = 0.6745;

  std::array<double, 3> est{};
  std::vector<double> residual;
  residual.reserve(static_cast<std::size_t>(image.height() - 2) *
                   (image.width() - 2));
  for (int c = 0; c < kChannels; ++c) {
    residual.clear();
    for (int r = 1; r + 1 < image.height(); ++r) {
      for (int col = 1; col + 1 < image.width(); ++col) {
        double acc = 0.0;
        for (int dr = -1; dr <= 1; ++dr) {
          for (int dc = -1; dc <= 1; ++dc) {
            acc += kKernel[dr + 1][dc + 1] * image.at(r + dr, col + dc, c);
          }
        }
        residual.push_back(acc);
      }
    }
    auto mid = residual.begin() + residual.size() / 2;
    std::nth_element(residual.begin(), mid, residual.end());
    const double median = *mid;
    for (double& v : residual) v = std::abs(v - median);
    std::nth_element(residual.begin(), mid, residual.end());
    est[c] = std::max(*mid / kMadToSigma / kGain, kMinEstimatedSigma);
  }
  return ChannelNoise(est[0], est[1], est[2]);
}

}  // namespace nnfn
