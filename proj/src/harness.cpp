#include "nnfn/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "nnfn/errors.hpp"
#include "nnfn/image_io.hpp"
#include "nnfn/solver.hpp"

namespace nnfn {

using nlohmann::json;
namespace fs = std::filesystem;

double psnr(const ColorImage& reference, const ColorImage& test) {
  if (reference.height() != test.height() || reference.width() != test.width()) {
    throw InvalidParameter("psnr: image dimensions differ");
  }
  if (reference.empty()) throw InvalidParameter("psnr: empty image");
  const auto a = reference.data();
  const auto b = test.data();
  double sse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    sse += d * d;
  }
  const double mse = sse / static_cast<double>(a.size());
  if (mse == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(255.0 * 255.0 / mse));
}

namespace {

int mirror(int i, int n) {
  // Half-sample symmetric extension, repeated for radii larger than n.
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

}  // namespace

ColorImage gaussian_blur(const ColorImage& image, double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw InvalidParameter("blur sigma must be finite and > 0");
  }
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * k * k / (sigma * sigma));
    taps[static_cast<std::size_t>(k + radius)] = v;
    total += v;
  }
  for (double& v : taps) v /= total;

  const int h = image.height();
  const int w = image.width();
  ColorImage horizontal(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < kChannels; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<std::size_t>(k + radius)] *
                 image.at(r, mirror(c + k, w), ch);
        }
        horizontal.at(r, c, ch) = acc;
      }
    }
  }
  ColorImage out(h, w);
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      for (int ch = 0; ch < kChannels; ++ch) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          acc += taps[static_cast<std::size_t>(k + radius)] *
                 horizontal.at(mirror(r + k, h), c, ch);
        }
        out.at(r, c, ch) = acc;
      }
    }
  }
  return out;
}

std::vector<ShrinkagePoint> export_shrinkage_curve(
    double t, const std::vector<double>& alphas,
    const std::vector<double>& sigmas, BelowThreshold below) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw InvalidParameter("shrinkage threshold must be finite and > 0");
  }
  std::vector<ShrinkagePoint> out;
  out.reserve(alphas.size() * sigmas.size());
  Vector one(1);
  for (double alpha : alphas) {
    for (double s : sigmas) {
      one(0) = s;
      out.push_back({alpha, s, prox_l1_minus_alpha_l2(one, t, alpha, below)(0)});
    }
  }
  return out;
}

void write_shrinkage_csv(std::ostream& out,
                         const std::vector<ShrinkagePoint>& points) {
  const auto old = out.precision(17);
  out << "alpha,sigma,shrunk\n";
  for (const auto& p : points) {
    out << p.alpha << ',' << p.sigma << ',' << p.shrunk << '\n';
  }
  out.precision(old);
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n < 1) throw InvalidParameter("linspace needs at least one sample");
  if (n == 1) return {lo};
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  }
  return out;
}

std::uint64_t image_seed(std::uint64_t run_seed, std::size_t index) {
  std::uint64_t z = run_seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

namespace {

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string_view to_string(NoiseMode m) {
  return m == NoiseMode::synthetic ? "synthetic" : "real";
}

json optional_number(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

ImageResult run_one(const ExperimentConfig& config, std::size_t index) {
  const fs::path input(config.inputs[index]);
  ImageResult row;
  row.name = input.stem().string();
  const auto start = std::chrono::steady_clock::now();

  const ColorImage loaded = load_image(input);
  ColorImage noisy;
  std::optional<ColorImage> clean;
  ChannelNoise sigma = config.noise.value_or(ChannelNoise(1, 1, 1));
  if (config.mode == NoiseMode::synthetic) {
    clean = loaded;
    noisy = add_awgn(loaded, *config.noise, image_seed(config.seed, index));
    if (config.clip_noisy) noisy = noisy.clipped();
    row.psnr_noisy = psnr(*clean, noisy.clipped());
  } else {
    noisy = loaded;
    if (!config.noise) sigma = estimate_noise_mad(noisy);
  }
  row.sigma = sigma.sigmas();

  DenoiseOptions options;
  options.reference = clean ? &*clean : nullptr;
  options.seed = config.seed;
  options.traces = config.emit.diagnostics ? TraceCapture::first_group
                                           : TraceCapture::none;
  const DenoiseResult result = denoise(noisy, sigma, config.params, options);
  if (clean) row.psnr_denoised = psnr(*clean, result.image);
  row.iterations = static_cast<int>(result.report.iterations.size());

  if (!config.output_dir.empty()) {
    const fs::path dir(config.output_dir);
    if (config.emit.denoised_images) {
      save_image(dir / (row.name + "_denoised.png"), result.image);
      if (config.mode == NoiseMode::synthetic) {
        save_image(dir / (row.name + "_noisy.png"), noisy);
      }
    }
    if (config.emit.diagnostics) {
      std::ostringstream csv;
      write_group_traces_csv(csv, result.traces);
      write_text(dir / (row.name + "_diagnostics.csv"), csv.str());
    }
  }
  row.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return row;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.params.validate();
  if (config.mode == NoiseMode::synthetic && !config.noise) {
    throw InvalidParameter("synthetic mode needs noise levels");
  }
  ExperimentReport report;
  report.config = config;
  report.started_at = utc_now();
  if (!config.output_dir.empty()) fs::create_directories(config.output_dir);

  double sum_noisy = 0.0;
  double sum_denoised = 0.0;
  int n_noisy = 0;
  int n_denoised = 0;
  for (std::size_t i = 0; i < config.inputs.size(); ++i) {
    ImageResult row;
    try {
      row = run_one(config, i);
    } catch (const std::exception& e) {
      row.name = fs::path(config.inputs[i]).stem().string();
      row.error = e.what();
    }
    if (row.psnr_noisy) {
      sum_noisy += *row.psnr_noisy;
      ++n_noisy;
    }
    if (row.psnr_denoised) {
      sum_denoised += *row.psnr_denoised;
      ++n_denoised;
    }
    report.per_image.push_back(std::move(row));
  }
  if (n_noisy > 0) report.average_psnr_noisy = sum_noisy / n_noisy;
  if (n_denoised > 0) report.average_psnr_denoised = sum_denoised / n_denoised;
  report.finished_at = utc_now();

  if (!config.output_dir.empty() && config.emit.report) {
    const fs::path dir(config.output_dir);
    write_text(dir / "report.json", to_json(report).dump(2) + "\n");
    std::ostringstream table;
    write_table_csv(table, report);
    write_text(dir / "table.csv", table.str());
  }
  return report;
}

json to_json(const ExperimentConfig& c) {
  return json{{"inputs", c.inputs},
              {"noise", c.noise ? json(c.noise->sigmas()) : json(nullptr)},
              {"params", to_json(c.params)},
              {"seed", c.seed},
              {"output_dir", c.output_dir},
              {"emit",
               {{"denoised_images", c.emit.denoised_images},
                {"diagnostics", c.emit.diagnostics},
                {"report", c.emit.report}}},
              {"mode", to_string(c.mode)},
              {"clip_noisy", c.clip_noisy}};
}

ExperimentConfig experiment_config_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("experiment config must be an object");
  ExperimentConfig c;
  try {
    if (j.contains("inputs")) c.inputs = j.at("inputs").get<std::vector<std::string>>();
    if (j.contains("noise") && !j.at("noise").is_null()) {
      const auto s = j.at("noise").get<std::vector<double>>();
      if (s.size() != 3) throw InvalidParameter("noise must have three entries");
      c.noise = ChannelNoise(s[0], s[1], s[2]);
    }
    if (j.contains("params")) c.params = denoise_params_from_json(j.at("params"));
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    if (j.contains("emit")) {
      const auto& e = j.at("emit");
      c.emit.denoised_images = e.value("denoised_images", c.emit.denoised_images);
      c.emit.diagnostics = e.value("diagnostics", c.emit.diagnostics);
      c.emit.report = e.value("report", c.emit.report);
    }
    if (j.contains("mode")) {
      const auto mode = j.at("mode").get<std::string>();
      if (mode == "synthetic") {
        c.mode = NoiseMode::synthetic;
      } else if (mode == "real") {
        c.mode = NoiseMode::real;
      } else {
        throw InvalidParameter("mode must be synthetic or real, got '" + mode + "'");
      }
    }
    if (j.contains("clip_noisy")) c.clip_noisy = j.at("clip_noisy").get<bool>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("experiment config: ") + e.what());
  }
  return c;
}

json to_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.per_image) {
    json entry{{"name", row.name},
               {"psnr_noisy", optional_number(row.psnr_noisy)},
               {"psnr_denoised", optional_number(row.psnr_denoised)},
               {"seconds", row.seconds},
               {"iterations", row.iterations},
               {"sigma", row.sigma}};
    if (row.error) entry["error"] = *row.error;
    rows.push_back(std::move(entry));
  }
  return json{{"version", kVersion},
              {"config", to_json(r.config)},
              {"rng", {{"algorithm", kRngAlgorithm}, {"seed", r.config.seed}}},
              {"per_image", rows},
              {"average",
               {{"psnr_noisy", optional_number(r.average_psnr_noisy)},
                {"psnr_denoised", optional_number(r.average_psnr_denoised)}}},
              {"timestamps", {{"started", r.started_at}, {"finished", r.finished_at}}}};
}

void write_table_csv(std::ostream& out, const ExperimentReport& r) {
  const auto old = out.precision(6);
  const auto field = [&](const std::optional<double>& v) {
    if (v) out << std::fixed << std::setprecision(2) << *v;
  };
  out << "name,psnr_noisy,psnr_denoised,seconds,iterations,error\n";
  for (const auto& row : r.per_image) {
    out << row.name << ',';
    field(row.psnr_noisy);
    out << ',';
    field(row.psnr_denoised);
    out << ',' << std::fixed << std::setprecision(3) << row.seconds << ','
        << row.iterations << ',';
    if (row.error) {
      std::string msg = *row.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << msg;
    }
    out << '\n';
  }
  out << "Average,";
  field(r.average_psnr_noisy);
  out << ',';
  field(r.average_psnr_denoised);
  out << ",,,\n";
  out.unsetf(std::ios::floatfield);
  out.precision(old);
}

}  // namespace nnfn
