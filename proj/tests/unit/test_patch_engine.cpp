#include <algorithm>
#include <map>
#include <tuple>

#include "doctest.h"
#include "nnfn/errors.hpp"
#include "nnfn/patch_engine.hpp"
#include "support.hpp"

using namespace nnfn;

namespace {

double brute_distance(const ColorImage& img, PatchCoord a, PatchCoord b, int p) {
  double d = 0.0;
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      for (int c = 0; c < 3; ++c) {
        const double e = img.at(a.row + i, a.col + j, c) - img.at(b.row + i, b.col + j, c);
        d += e * e;
      }
    }
  }
  return d;
}

// Reference matcher written from the definition, without shortcuts.
std::vector<Match> brute_match(const ColorImage& img, PatchCoord key, int p, int s,
                               int m) {
  std::vector<std::tuple<double, int, int>> all;
  const int lo = s / 2;
  for (int r = key.row - lo; r < key.row - lo + s; ++r) {
    for (int c = key.col - lo; c < key.col - lo + s; ++c) {
      if (r < 0 || c < 0 || r > img.height() - p || c > img.width() - p) continue;
      if (r == key.row && c == key.col) continue;
      all.emplace_back(brute_distance(img, key, {r, c}, p), r, c);
    }
  }
  std::sort(all.begin(), all.end());
  std::vector<Match> out{{key, 0.0}};
  for (const auto& [d, r, c] : all) {
    if (static_cast<int>(out.size()) == m) break;
    out.push_back({{r, c}, d});
  }
  return out;
}

}  // namespace

TEST_SUITE("patch_engine") {
  TEST_CASE("vectorization order is channel-major, column-major inside") {
    CHECK(patch_index(6, 0, 0, 0) == 0);
    CHECK(patch_index(6, 0, 1, 0) == 1);
    CHECK(patch_index(6, 0, 0, 1) == 6);
    CHECK(patch_index(6, 1, 0, 0) == 36);
    CHECK(patch_index(6, 2, 5, 5) == 107);
  }

  TEST_CASE("key grid examples") {
    CHECK(key_grid(12, 6, 6) == std::vector<int>{0, 6});
    CHECK(key_grid(13, 6, 6) == std::vector<int>{0, 6, 7});
    CHECK(key_grid(6, 6, 4) == std::vector<int>{0});

    const auto tiles = extract_key_patches(ColorImage(12, 12), 6, 6);
    CHECK(tiles == std::vector<PatchCoord>{{0, 0}, {0, 6}, {6, 0}, {6, 6}});
    const auto clamped = extract_key_patches(ColorImage(13, 13), 6, 6);
    CHECK(clamped.size() == 9);
    CHECK(clamped[2] == PatchCoord{0, 7});
    CHECK(clamped.back() == PatchCoord{7, 7});
    CHECK(extract_key_patches(ColorImage(6, 6), 6, 4) ==
          std::vector<PatchCoord>{{0, 0}});
  }

  TEST_CASE("key grid rejects bad sizes") {
    CHECK_THROWS_AS(extract_key_patches(ColorImage(5, 8), 6, 4), InvalidParameter);
    CHECK_THROWS_AS(extract_key_patches(ColorImage(8, 8), 6, 0), InvalidParameter);
    CHECK_THROWS_AS(extract_key_patches(ColorImage(8, 8), 0, 1), InvalidParameter);
  }

  TEST_CASE("constant image: ties resolve lexicographically, key first") {
    const ColorImage img(30, 30, 7.0);
    const PatchCoord key{10, 10};
    const auto m = block_match(img, key, 4, 8, 5);
    REQUIRE(m.size() == 5);
    CHECK(m[0].coord == key);
    for (const auto& x : m) CHECK(x.distance == 0.0);
    const std::vector<PatchCoord> expected{{10, 10}, {6, 6}, {6, 7}, {6, 8}, {6, 9}};
    for (std::size_t i = 0; i < m.size(); ++i) CHECK(m[i].coord == expected[i]);
  }

  TEST_CASE("vertical stripes: exact matches sit at multiples of the period") {
    ColorImage img(32, 32);
    for (int r = 0; r < 32; ++r) {
      for (int c = 0; c < 32; ++c) {
        for (int ch = 0; ch < 3; ++ch) img.at(r, c, ch) = (c / 2) % 2 ? 200.0 : 20.0;
      }
    }
    const PatchCoord key{12, 13};
    const auto m = block_match(img, key, 4, 12, 200);
    for (const auto& x : m) {
      CHECK(x.distance == doctest::Approx(brute_distance(img, key, x.coord, 4)));
      CHECK((x.distance == 0.0) == ((x.coord.col - key.col) % 4 == 0));
    }
  }

  TEST_CASE("matches agree with a brute-force search") {
    const ColorImage img = test::random_image(40, 37, 19);
    for (const PatchCoord key : {PatchCoord{0, 0}, PatchCoord{17, 20}, PatchCoord{34, 31}}) {
      const auto got = block_match(img, key, 6, 20, 60);
      const auto want = brute_match(img, key, 6, 20, 60);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].coord == want[i].coord);
        CHECK(got[i].distance == doctest::Approx(want[i].distance).epsilon(1e-12));
      }
      for (std::size_t i = 1; i < got.size(); ++i) {
        CHECK(got[i - 1].distance <= got[i].distance);
      }
    }
  }

  TEST_CASE("group size larger than the window returns every candidate") {
    const ColorImage img = test::random_image(10, 10, 4);
    const auto m = block_match(img, {0, 0}, 3, 6, 1000);
    // Window rows/cols 0..2 are in bounds (offsets -3..2 around 0).
    CHECK(m.size() == 9);
    for (std::size_t i = 2; i < m.size(); ++i) CHECK(m[i - 1].distance <= m[i].distance);
  }

  TEST_CASE("form_patch_matrix of a single pixel") {
    const ColorImage img = test::random_image(5, 5, 8);
    const PatchMatrix pm = form_patch_matrix(img, {{2, 3}}, 1);
    REQUIRE(pm.data.rows() == 3);
    for (int c = 0; c < 3; ++c) CHECK(pm.data(c, 0) == img.at(2, 3, c));
  }

  TEST_CASE("constant image gives a constant matrix") {
    const PatchMatrix pm = form_patch_matrix(ColorImage(9, 9, 3.25), {{0, 0}, {3, 2}}, 4);
    CHECK((pm.data.array() == 3.25).all());
  }

  TEST_CASE("form then unvectorize recovers the patch") {
    const ColorImage img = test::random_image(20, 20, 12);
    const std::vector<PatchCoord> coords{{1, 2}, {14, 9}};
    const PatchMatrix pm = form_patch_matrix(img, coords, 6);
    for (int j = 0; j < 2; ++j) {
      const ColorImage patch = unvectorize_patch(pm.data, j, 6);
      for (int i = 0; i < 6; ++i) {
        for (int k = 0; k < 6; ++k) {
          for (int c = 0; c < 3; ++c) {
            CHECK(patch.at(i, k, c) == img.at(coords[j].row + i, coords[j].col + k, c));
          }
        }
      }
    }
  }

  TEST_CASE("out-of-bounds coordinates are rejected") {
    const ColorImage img(10, 10);
    CHECK_THROWS_AS(form_patch_matrix(img, {{5, 5}}, 6), InvalidParameter);
    CHECK_THROWS_AS(form_patch_matrix(img, {{-1, 0}}, 2), InvalidParameter);
  }

  TEST_CASE("form_patch_matrix is linear in the image") {
    const ColorImage a = test::random_image(16, 16, 1);
    const ColorImage b = test::random_image(16, 16, 2);
    ColorImage mix(16, 16);
    for (std::size_t i = 0; i < mix.size(); ++i) {
      mix.data()[i] = 2.5 * a.data()[i] - 0.75 * b.data()[i];
    }
    const std::vector<PatchCoord> coords{{0, 0}, {5, 7}, {10, 10}};
    const Matrix lhs = form_patch_matrix(mix, coords, 6).data;
    const Matrix rhs = 2.5 * form_patch_matrix(a, coords, 6).data -
                       0.75 * form_patch_matrix(b, coords, 6).data;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("extract, form and aggregate is the identity") {
    const ColorImage img = test::random_image(37, 29, 6);
    std::vector<PatchMatrix> groups;
    for (const auto key : extract_key_patches(img, 6, 4)) {
      groups.push_back(form_patch_matrix(img, block_match_coords(img, key, 6, 20, 10), 6));
    }
    const ColorImage back = aggregate(groups, 37, 29);
    double worst = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
      worst = std::max(worst, std::abs(back.data()[i] - img.data()[i]));
    }
    CHECK(worst <= 1e-10);
  }

  TEST_CASE("overlapping patches average to the midpoint") {
    PatchMatrix a = form_patch_matrix(ColorImage(3, 3, 0.0), {{0, 0}}, 2);
    PatchMatrix b = form_patch_matrix(ColorImage(3, 3, 0.0), {{1, 1}}, 2);
    a.data.setConstant(4.0);
    b.data.setConstant(6.0);
    Aggregator acc(3, 3);
    acc.add(a);
    acc.add(b);
    // Cover the remaining corners with patches that avoid (1, 1).
    PatchMatrix c = form_patch_matrix(ColorImage(3, 3), {{0, 1}, {1, 0}}, 2);
    c.coords = {{0, 1}, {1, 0}};
    c.data.setConstant(5.0);
    acc.add(c);
    const ColorImage out = acc.finish();
    // (1, 1) is covered by all four patches: 4, 6, 5, 5.
    CHECK(out.at(1, 1, 0) == doctest::Approx(5.0));
    // (0, 0) only by a.
    CHECK(out.at(0, 0, 2) == 4.0);
    // (2, 2) only by b.
    CHECK(out.at(2, 2, 1) == 6.0);
  }

  TEST_CASE("two disagreeing patches meet at the midpoint") {
    Aggregator acc(1, 2);
    PatchMatrix a = form_patch_matrix(ColorImage(1, 2), {{0, 0}}, 1);
    PatchMatrix b = a;
    a.data.setConstant(10.0);
    b.data.setConstant(12.0);
    PatchMatrix other = form_patch_matrix(ColorImage(1, 2), {{0, 1}}, 1);
    acc.add(a);
    acc.add(b);
    acc.add(other);
    CHECK(acc.finish().at(0, 0, 0) == 11.0);
  }

  TEST_CASE("aggregation matches a brute-force accumulator") {
    std::mt19937_64 rng(21);
    const int h = 23;
    const int w = 31;
    const int p = 5;
    std::uniform_int_distribution<int> row(0, h - p);
    std::uniform_int_distribution<int> col(0, w - p);
    std::vector<PatchMatrix> groups;
    // Full-coverage tiling first, then random extras.
    for (const auto key : extract_key_patches(ColorImage(h, w), p, 3)) {
      PatchMatrix g;
      g.p = p;
      g.coords = {key};
      g.data = test::random_matrix(3 * p * p, 1, rng, 50.0);
      groups.push_back(g);
    }
    for (int n = 0; n < 40; ++n) {
      PatchMatrix g;
      g.p = p;
      for (int k = 0; k < 4; ++k) g.coords.push_back({row(rng), col(rng)});
      g.data = test::random_matrix(3 * p * p, 4, rng, 50.0);
      groups.push_back(g);
    }
    std::vector<double> sum(static_cast<std::size_t>(h * w * 3), 0.0);
    std::vector<double> cnt(static_cast<std::size_t>(h * w), 0.0);
    for (const auto& g : groups) {
      for (int j = 0; j < g.group_size(); ++j) {
        for (int c = 0; c < 3; ++c) {
          for (int jj = 0; jj < p; ++jj) {
            for (int ii = 0; ii < p; ++ii) {
              const int r = g.coords[j].row + ii;
              const int k = g.coords[j].col + jj;
              sum[static_cast<std::size_t>((r * w + k) * 3 + c)] +=
                  g.data(patch_index(p, c, ii, jj), j);
              if (c == 0) cnt[static_cast<std::size_t>(r * w + k)] += 1.0;
            }
          }
        }
      }
    }
    const ColorImage out = aggregate(groups, h, w);
    for (int r = 0; r < h; ++r) {
      for (int k = 0; k < w; ++k) {
        for (int c = 0; c < 3; ++c) {
          const double want = sum[static_cast<std::size_t>((r * w + k) * 3 + c)] /
                              cnt[static_cast<std::size_t>(r * w + k)];
          CHECK(std::abs(out.at(r, k, c) - want) <= 1e-12);
        }
      }
    }
  }

  TEST_CASE("uncovered pixels are an internal error") {
    PatchMatrix g = form_patch_matrix(ColorImage(4, 4), {{0, 0}}, 2);
    CHECK_THROWS_AS(aggregate({g}, 4, 4), InternalError);
  }
}
