#include "nnfn/patch_engine.hpp"

#include <algorithm>
#include <string>

#include "nnfn/errors.hpp"
#include "nnfn/simd/kernels.hpp"

namespace nnfn {

namespace {

void check_patch_fits(const ColorImage& image, int p) {
  if (p < 1) throw InvalidParameter("patch size must be >= 1");
  if (p > std::min(image.height(), image.width())) {
    throw InvalidParameter("patch size " + std::to_string(p) +
                           " exceeds image dimensions " +
                           std::to_string(image.height()) + "x" +
                           std::to_string(image.width()));
  }
}

bool in_bounds(PatchCoord c, int height, int width, int p) {
  return c.row >= 0 && c.col >= 0 && c.row + p <= height && c.col + p <= width;
}

std::string coord_string(PatchCoord c) {
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

double patch_distance(const ColorImage& image, PatchCoord a, PatchCoord b,
                      int p) {
  const auto& k = simd::kernels();
  const std::size_t span = static_cast<std::size_t>(p) * kChannels;
  double acc = 0.0;
  for (int i = 0; i < p; ++i) {
    acc += k.squared_distance(image.pixel(a.row + i, a.col),
                              image.pixel(b.row + i, b.col), span);
  }
  return acc;
}

}  // namespace

std::vector<int> key_grid(int extent, int p, int stride) {
  if (stride < 1) throw InvalidParameter("stride must be >= 1");
  if (p < 1 || p > extent) throw InvalidParameter("patch does not fit");
  const int last = extent - p;
  std::vector<int> grid;
  for (int v = 0; v < last; v += stride) grid.push_back(v);
  grid.push_back(last);
  return grid;
}

std::vector<PatchCoord> extract_key_patches(const ColorImage& image, int p,
                                            int stride) {
  check_patch_fits(image, p);
  const auto rows = key_grid(image.height(), p, stride);
  const auto cols = key_grid(image.width(), p, stride);
  std::vector<PatchCoord> out;
  out.reserve(rows.size() * cols.size());
  for (int r : rows) {
    for (int c : cols) out.push_back({r, c});
  }
  return out;
}

std::vector<Match> block_match(const ColorImage& image, PatchCoord key, int p,
                               int window, int group_size) {
  check_patch_fits(image, p);
  if (window < p) throw InvalidParameter("search window must be >= patch size");
  if (group_size < 1) throw InvalidParameter("group size must be >= 1");
  if (!in_bounds(key, image.height(), image.width(), p)) {
    throw InvalidParameter("key patch " + coord_string(key) + " out of bounds");
  }

  const int before = window / 2;
  const int after = window - before - 1;
  const int r0 = std::max(0, key.row - before);
  const int r1 = std::min(image.height() - p, key.row + after);
  const int c0 = std::max(0, key.col - before);
  const int c1 = std::min(image.width() - p, key.col + after);

  std::vector<Match> candidates;
  candidates.reserve(static_cast<std::size_t>(r1 - r0 + 1) * (c1 - c0 + 1));
  for (int r = r0; r <= r1; ++r) {
    for (int c = c0; c <= c1; ++c) {
      const PatchCoord pc{r, c};
      if (pc == key) continue;
      candidates.push_back({pc, patch_distance(image, key, pc, p)});
    }
  }

  const auto closer = [](const Match& a, const Match& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.coord < b.coord;
  };
  const std::size_t keep =
      std::min(candidates.size(), static_cast<std::size_t>(group_size - 1));
  std::partial_sort(candidates.begin(), candidates.begin() + keep,
                    candidates.end(), closer);

  std::vector<Match> out;
  out.reserve(keep + 1);
  out.push_back({key, 0.0});
  out.insert(out.end(), candidates.begin(), candidates.begin() + keep);
  return out;
}

std::vector<PatchCoord> block_match_coords(const ColorImage& image,
                                           PatchCoord key, int p, int window,
                                           int group_size) {
  const auto matches = block_match(image, key, p, window, group_size);
  std::vector<PatchCoord> out;
  out.reserve(matches.size());
  for (const auto& m : matches) out.push_back(m.coord);
  return out;
}

PatchMatrix form_patch_matrix(const ColorImage& image,
                              const std::vector<PatchCoord>& coords, int p) {
  check_patch_fits(image, p);
  if (coords.empty()) throw InvalidParameter("patch group is empty");
  PatchMatrix out{Matrix(3 * p * p, static_cast<Eigen::Index>(coords.size())),
                  coords, p};
  for (std::size_t j = 0; j < coords.size(); ++j) {
    const PatchCoord pc = coords[j];
    if (!in_bounds(pc, image.height(), image.width(), p)) {
      throw InvalidParameter("patch " + coord_string(pc) + " out of bounds");
    }
    double* col = out.data.col(static_cast<Eigen::Index>(j)).data();
    for (int jj = 0; jj < p; ++jj) {
      for (int ii = 0; ii < p; ++ii) {
        const double* px = image.pixel(pc.row + ii, pc.col + jj);
        for (int c = 0; c < kChannels; ++c) col[patch_index(p, c, ii, jj)] = px[c];
      }
    }
  }
  return out;
}

ColorImage unvectorize_patch(const Matrix& data, int col, int p) {
  if (data.rows() != 3 * p * p || col < 0 || col >= data.cols()) {
    throw InvalidParameter("column does not hold a p x p x 3 patch");
  }
  ColorImage out(p, p);
  for (int jj = 0; jj < p; ++jj) {
    for (int ii = 0; ii < p; ++ii) {
      for (int c = 0; c < kChannels; ++c) {
        out.at(ii, jj, c) = data(patch_index(p, c, ii, jj), col);
      }
    }
  }
  return out;
}

Aggregator::Aggregator(int height, int width)
    : height_(height),
      width_(width),
      sum_(static_cast<std::size_t>(height) * width * kChannels, 0.0),
      count_(static_cast<std::size_t>(height) * width, 0) {}

void Aggregator::add(const PatchMatrix& group) {
  const int p = group.p;
  if (p < 1 || group.data.rows() != 3 * p * p ||
      group.data.cols() != group.group_size()) {
    throw InvalidParameter("patch matrix shape does not match its group");
  }
  for (int j = 0; j < group.group_size(); ++j) {
    const PatchCoord pc = group.coords[j];
    if (!in_bounds(pc, height_, width_, p)) {
      throw InvalidParameter("patch " + coord_string(pc) + " out of bounds");
    }
    const double* col = group.data.col(j).data();
    for (int jj = 0; jj < p; ++jj) {
      for (int ii = 0; ii < p; ++ii) {
        const std::size_t px =
            static_cast<std::size_t>(pc.row + ii) * width_ + (pc.col + jj);
        for (int c = 0; c < kChannels; ++c) {
          sum_[px * kChannels + c] += col[patch_index(p, c, ii, jj)];
        }
        ++count_[px];
      }
    }
  }
}

ColorImage Aggregator::finish() const {
  ColorImage out(height_, width_);
  auto data = out.data();
  for (std::size_t px = 0; px < count_.size(); ++px) {
    if (count_[px] == 0) {
      throw InternalError("pixel (" + std::to_string(px / width_) + ", " +
                          std::to_string(px % width_) +
                          ") is not covered by any patch");
    }
    const double n = static_cast<double>(count_[px]);
    for (int c = 0; c < kChannels; ++c) {
      data[px * kChannels + c] = sum_[px * kChannels + c] / n;
    }
  }
  return out;
}

ColorImage aggregate(const std::vector<PatchMatrix>& groups, int height,
                     int width) {
  Aggregator acc(height, width);
  for (const auto& g : groups) acc.add(g);
  return acc.finish();
}

}  // namespace nnfn
