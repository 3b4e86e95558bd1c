#pragma once

// Patch grouping and aggregation.
//
// Vectorization order of a p x p x 3 patch at top-left (r0, c0), which is
// also the layout of debug dumps and must stay stable:
//
//   index(c, i, j) = c * p² + j * p + i
//
// where c in {0: R, 1: G, 2: B}, i is the row offset and j the column offset
// inside the patch (column-major within each channel block).

#include <compare>
#include <cstddef>
#include <vector>

#include "nnfn/image.hpp"
#include "nnfn/linalg.hpp"

namespace nnfn {

struct PatchCoord {
  int row = 0;
  int col = 0;

  friend auto operator<=>(const PatchCoord&, const PatchCoord&) = default;
};

/// 3p² x M matrix of stacked patches; column j belongs to coords[j].
struct PatchMatrix {
  Matrix data;
  std::vector<PatchCoord> coords;
  int p = 0;

  int group_size() const { return static_cast<int>(coords.size()); }
};

/// Position of patch entry (channel, i, j) inside a column.
constexpr int patch_index(int p, int channel, int i, int j) {
  return channel * p * p + j * p + i;
}

/// Grid {0, s, 2s, ...} along one axis, with the last point moved to
/// extent - p so the border is covered.
std::vector<int> key_grid(int extent, int p, int stride);

/// Key patches on the clamped stride grid, row-major. Throws InvalidParameter
/// if p > min(H, W), p < 1 or stride < 1.
std::vector<PatchCoord> extract_key_patches(const ColorImage& image, int p,
                                            int stride);

struct Match {
  PatchCoord coord;
  double distance = 0.0;
};

/// M nearest patches to `key` inside the S x S window of top-left corners
/// centred on it (clipped to the image). Squared Euclidean distance over the
/// 3p² vector; ties broken by (row, col). The key is always first.
std::vector<Match> block_match(const ColorImage& image, PatchCoord key, int p,
                               int window, int group_size);

/// Convenience wrapper returning only coordinates.
std::vector<PatchCoord> block_match_coords(const ColorImage& image,
                                           PatchCoord key, int p, int window,
                                           int group_size);

/// Throws InvalidParameter for an out-of-bounds coordinate.
PatchMatrix form_patch_matrix(const ColorImage& image,
                              const std::vector<PatchCoord>& coords, int p);

/// Inverse of one column of form_patch_matrix: writes column `col` of `data`
/// into a fresh p x p image.
ColorImage unvectorize_patch(const Matrix& data, int col, int p);

/// Running per-pixel sum and count of patch estimates.
class Aggregator {
 public:
  Aggregator(int height, int width);

  /// Throws InvalidParameter if a coordinate is out of bounds or the matrix
  /// shape does not match the group.
  void add(const PatchMatrix& group);

  /// Per-pixel mean. Throws InternalError if some pixel was never covered.
  ColorImage finish() const;

  int height() const { return height_; }
  int width() const { return width_; }

 private:
  int height_;
  int width_;
  std::vector<double> sum_;
  std::vector<std::size_t> count_;
};

/// Uniform-weight average of every patch estimate covering each pixel.
ColorImage aggregate(const std::vector<PatchMatrix>& groups, int height,
                     int width);

}  // namespace nnfn
