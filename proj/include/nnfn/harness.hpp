#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "nnfn/image.hpp"
#include "nnfn/noise_model.hpp"
#include "nnfn/pipeline.hpp"

namespace nnfn {

/// Reported in place of +inf for identical images.
inline constexpr double kPsnrCap = 999.0;

/// 10 log10(255² / MSE) over all H*W*3 entries; kPsnrCap when MSE is 0.
double psnr(const ColorImage& reference, const ColorImage& test);

/// Channel-wise separable Gaussian blur, radius ceil(3 sigma), mirrored
/// borders. Used as the baseline denoiser in comparisons.
ColorImage gaussian_blur(const ColorImage& image, double sigma);

struct ShrinkagePoint {
  double alpha = 0.0;
  double sigma = 0.0;
  double shrunk = 0.0;
};

/// Scalar prox output for every (alpha, sigma) pair, alpha-major.
std::vector<ShrinkagePoint> export_shrinkage_curve(
    double t, const std::vector<double>& alphas,
    const std::vector<double>& sigmas,
    BelowThreshold below = BelowThreshold::sparse);

void write_shrinkage_csv(std::ostream& out,
                         const std::vector<ShrinkagePoint>& points);

/// n evenly spaced samples on [lo, hi], endpoints included.
std::vector<double> linspace(double lo, double hi, int n);

enum class NoiseMode { synthetic, real };

struct EmitFlags {
  bool denoised_images = true;
  bool diagnostics = false;
  bool report = true;
};

struct ExperimentConfig {
  std::vector<std::string> inputs;
  /// Required for synthetic mode. In real mode, absent means "estimate".
  std::optional<ChannelNoise> noise;
  DenoiseParams params;
  std::uint64_t seed = 0;
  std::string output_dir;
  EmitFlags emit;
  NoiseMode mode = NoiseMode::synthetic;
  /// Clip synthesized noisy images to [0, 255] before denoising.
  bool clip_noisy = false;
};

struct ImageResult {
  std::string name;
  std::optional<double> psnr_noisy;
  std::optional<double> psnr_denoised;
  double seconds = 0.0;
  int iterations = 0;
  std::array<double, 3> sigma{};
  std::optional<std::string> error;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<ImageResult> per_image;
  std::optional<double> average_psnr_noisy;
  std::optional<double> average_psnr_denoised;
  std::string started_at;
  std::string finished_at;
};

/// Per-image failures (unreadable file, numerical error) are recorded in the
/// row and the run continues.
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentReport& r);

/// Per-image rows plus an "Average" row.
void write_table_csv(std::ostream& out, const ExperimentReport& r);

/// Seed for image `index` of a run; images get independent noise streams.
std::uint64_t image_seed(std::uint64_t run_seed, std::size_t index);

}  // namespace nnfn
