#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "nnfn/image.hpp"
#include "nnfn/linalg.hpp"

namespace nnfn::test {

inline ColorImage random_image(int h, int w, std::uint64_t seed,
                               double lo = 0.0, double hi = 255.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  ColorImage img(h, w);
  for (double& v : img.data()) v = u(rng);
  return img;
}

inline Matrix random_matrix(Eigen::Index rows, Eigen::Index cols,
                            std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

/// Smooth test image: low-frequency color gradients plus a soft disk.
inline ColorImage smooth_image(int h, int w) {
  ColorImage img(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const double dr = r - h / 2.0;
      const double dc = c - w / 2.0;
      const double disk = 60.0 / (1.0 + std::exp((std::hypot(dr, dc) - h / 4.0) / 2.0));
      img.at(r, c, 0) = 80.0 + 0.6 * r + disk;
      img.at(r, c, 1) = 120.0 + 0.4 * c - 0.5 * disk;
      img.at(r, c, 2) = 60.0 + 0.3 * (r + c) + 0.8 * disk;
    }
  }
  return img;
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("nnfn_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline std::filesystem::path data_dir() { return NNFN_TEST_DATA_DIR; }

}  // namespace nnfn::test
