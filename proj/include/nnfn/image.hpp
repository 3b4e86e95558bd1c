#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace nnfn {

inline constexpr int kChannels = 3;

/// H x W x 3 image of double intensities, interleaved RGB, row-major.
///
/// Nominal range is [0, 255]. Values may leave that range while the image is
/// being processed (noise synthesis, aggregation); clipping is explicit.
class ColorImage {
 public:
  ColorImage() = default;
  ColorImage(int height, int width, double fill = 0.0);

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return data_.empty(); }
  std::size_t size() const { return data_.size(); }

  double& at(int row, int col, int channel) {
    return data_[index(row, col, channel)];
  }
  double at(int row, int col, int channel) const {
    return data_[index(row, col, channel)];
  }

  /// Pointer to the first channel of pixel (row, col).
  double* pixel(int row, int col) { return data_.data() + index(row, col, 0); }
  const double* pixel(int row, int col) const {
    return data_.data() + index(row, col, 0);
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  /// Row stride in doubles.
  std::size_t stride() const {
    return static_cast<std::size_t>(width_) * kChannels;
  }

  bool all_finite() const;

  /// Copy with every value clamped to [lo, hi].
  ColorImage clipped(double lo = 0.0, double hi = 255.0) const;

  friend bool operator==(const ColorImage&, const ColorImage&) = default;

 private:
  std::size_t index(int row, int col, int channel) const {
    return (static_cast<std::size_t>(row) * width_ + col) * kChannels + channel;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

}  // namespace nnfn
