#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "nnfn/errors.hpp"
#include "nnfn/harness.hpp"
#include "nnfn/image_io.hpp"
#include "support.hpp"

using namespace nnfn;

namespace {

// Report JSON without the fields that legitimately vary between runs.
nlohmann::json stable_part(nlohmann::json j) {
  j.erase("timestamps");
  for (auto& row : j.at("per_image")) row.erase("seconds");
  return j;
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("psnr examples") {
    const ColorImage a = test::random_image(9, 7, 1);
    CHECK(psnr(a, a) == kPsnrCap);
    CHECK(psnr(ColorImage(4, 4, 0.0), ColorImage(4, 4, 255.0)) == doctest::Approx(0.0));
    CHECK(psnr(ColorImage(4, 4, 0.0), ColorImage(4, 4, 25.5)) == doctest::Approx(20.0));
    CHECK_THROWS_AS(psnr(ColorImage(4, 4), ColorImage(4, 5)), InvalidParameter);
  }

  TEST_CASE("psnr is symmetric and shift invariant") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const ColorImage a = test::random_image(16, 12, 2 * seed);
      const ColorImage b = test::random_image(16, 12, 2 * seed + 1);
      CHECK(psnr(a, b) == doctest::Approx(psnr(b, a)).epsilon(1e-14));
      ColorImage a2 = a;
      ColorImage b2 = b;
      const double shift = 17.0 * static_cast<double>(seed) - 100.0;
      for (double& v : a2.data()) v += shift;
      for (double& v : b2.data()) v += shift;
      CHECK(psnr(a2, b2) == doctest::Approx(psnr(a, b)).epsilon(1e-9));
    }
  }

  TEST_CASE("gaussian blur keeps constants and smooths noise") {
    const ColorImage flat(20, 15, 42.0);
    const ColorImage blurred = gaussian_blur(flat, 1.0);
    for (double v : blurred.data()) CHECK(v == doctest::Approx(42.0));
    const ColorImage noisy = add_awgn(flat, ChannelNoise(10, 10, 10), 3);
    CHECK(psnr(flat, gaussian_blur(noisy, 1.0)) > psnr(flat, noisy) + 5.0);
    CHECK_THROWS_AS(gaussian_blur(flat, 0.0), InvalidParameter);
  }

  TEST_CASE("shrinkage curve examples") {
    const double t = 1.5;
    const auto sigmas = linspace(0.0, 6.0, 61);
    const auto soft = export_shrinkage_curve(t, {0.0}, sigmas);
    for (const auto& pt : soft) {
      CHECK(pt.shrunk == doctest::Approx(std::max(pt.sigma - t, 0.0)));
    }

    const auto below = export_shrinkage_curve(t, {0.0, 0.5, 1.0, 1.5, 1.9},
                                              linspace(0.0, 1.49, 50),
                                              BelowThreshold::zero);
    for (const auto& pt : below) CHECK(pt.shrunk == 0.0);

    const auto cross = export_shrinkage_curve(t, {1.0}, {2.0 * t});
    CHECK(cross.front().shrunk == doctest::Approx(2.0 * t));
    CHECK_THROWS_AS(export_shrinkage_curve(0.0, {1.0}, {1.0}), InvalidParameter);
  }

  TEST_CASE("shrinkage CSV layout") {
    std::ostringstream out;
    write_shrinkage_csv(out, export_shrinkage_curve(1.0, {0.0, 1.0}, linspace(0, 2, 3)));
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "alpha,sigma,shrunk");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 6);
  }

  TEST_CASE("linspace") {
    CHECK(linspace(1.0, 1.0, 1) == std::vector<double>{1.0});
    const auto v = linspace(0.0, 1.0, 5);
    REQUIRE(v.size() == 5);
    CHECK(v[2] == 0.5);
    CHECK(v.back() == 1.0);
    CHECK_THROWS_AS(linspace(0, 1, 0), InvalidParameter);
  }

  TEST_CASE("empty run") {
    ExperimentConfig config;
    config.noise = ChannelNoise(30, 10, 50);
    const ExperimentReport r = run_experiment(config);
    CHECK(r.per_image.empty());
    CHECK_FALSE(r.average_psnr_denoised.has_value());
    const auto j = to_json(r);
    CHECK(j.at("per_image").empty());
    CHECK(j.at("rng").at("seed") == 0);
  }

  TEST_CASE("constant image run writes artifacts and improves PSNR") {
    const auto dir = test::temp_dir("harness_constant");
    save_image(dir / "flat.png", ColorImage(64, 64, 128.0));
    ExperimentConfig config;
    config.inputs = {(dir / "flat.png").string(), (dir / "missing.png").string()};
    config.noise = ChannelNoise(30, 10, 50);
    config.params.threads = 1;
    config.params.outer_iters = 1;
    config.output_dir = (dir / "out").string();
    config.emit.diagnostics = true;
    config.seed = 11;
    const ExperimentReport r = run_experiment(config);
    REQUIRE(r.per_image.size() == 2);
    const ImageResult& row = r.per_image[0];
    CHECK_FALSE(row.error.has_value());
    REQUIRE(row.psnr_denoised.has_value());
    CHECK(*row.psnr_denoised > *row.psnr_noisy);
    CHECK(row.iterations == 1);
    CHECK(r.per_image[1].error.has_value());
    CHECK(r.average_psnr_denoised == row.psnr_denoised);

    for (const char* f : {"flat_denoised.png", "flat_noisy.png", "flat_diagnostics.csv",
                          "report.json", "table.csv"}) {
      CHECK(std::filesystem::exists(dir / "out" / f));
    }
    std::ifstream table(dir / "out" / "table.csv");
    std::string line;
    std::getline(table, line);
    CHECK(line == "name,psnr_noisy,psnr_denoised,seconds,iterations,error");
    int lines = 0;
    std::string last;
    while (std::getline(table, line)) {
      ++lines;
      last = line;
    }
    CHECK(lines == 3);
    CHECK(last.rfind("Average,", 0) == 0);
  }

  TEST_CASE("identical config and seed reproduce the report") {
    const auto dir = test::temp_dir("harness_repro");
    save_image(dir / "img.png", test::smooth_image(24, 24));
    ExperimentConfig config;
    config.inputs = {(dir / "img.png").string()};
    config.noise = ChannelNoise(30, 10, 50);
    config.params.threads = 1;
    config.params.outer_iters = 1;
    config.seed = 5;
    const auto a = stable_part(to_json(run_experiment(config)));
    const auto b = stable_part(to_json(run_experiment(config)));
    CHECK(a.dump() == b.dump());
    config.seed = 6;
    const auto c = stable_part(to_json(run_experiment(config)));
    CHECK(a.dump() != c.dump());
  }

  TEST_CASE("real-noise mode estimates sigma") {
    const auto dir = test::temp_dir("harness_real");
    save_image(dir / "noisy.png",
               add_awgn(ColorImage(32, 32, 120.0), ChannelNoise(12, 12, 12), 2));
    ExperimentConfig config;
    config.inputs = {(dir / "noisy.png").string()};
    config.mode = NoiseMode::real;
    config.params.threads = 1;
    config.params.outer_iters = 1;
    const ExperimentReport r = run_experiment(config);
    REQUIRE(r.per_image.size() == 1);
    CHECK_FALSE(r.per_image[0].error.has_value());
    CHECK_FALSE(r.per_image[0].psnr_denoised.has_value());
    CHECK(r.per_image[0].sigma[0] == doctest::Approx(12.0).epsilon(0.3));
  }

  TEST_CASE("config JSON round trip") {
    ExperimentConfig c;
    c.inputs = {"a.png", "b.ppm"};
    c.noise = ChannelNoise(30, 10, 50);
    c.params.outer_iters = 3;
    c.seed = 99;
    c.output_dir = "out";
    c.emit.diagnostics = true;
    c.clip_noisy = true;
    const auto j = to_json(c);
    CHECK(to_json(experiment_config_from_json(j)) == j);
    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"noise", {1, 2}}}),
                    InvalidParameter);
    CHECK_THROWS_AS(experiment_config_from_json(nlohmann::json{{"mode", "fake"}}),
                    InvalidParameter);
    CHECK_THROWS_AS(run_experiment(ExperimentConfig{}), InvalidParameter);
  }

  TEST_CASE("image seeds are distinct per index") {
    CHECK(image_seed(0, 0) != image_seed(0, 1));
    CHECK(image_seed(0, 0) != image_seed(1, 0));
    CHECK(image_seed(3, 4) == image_seed(3, 4));
  }
}
