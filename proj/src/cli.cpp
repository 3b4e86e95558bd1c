#include "nnfn/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nnfn/errors.hpp"
#include "nnfn/harness.hpp"
#include "nnfn/image_io.hpp"
#include "nnfn/linalg.hpp"
#include "nnfn/noise_model.hpp"
#include "nnfn/pipeline.hpp"

namespace nnfn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kRealLambda = 4.86;
constexpr double kRealRho0 = 4.55;
constexpr double kRealAlpha = 1.05;

// "r,g,b" or a single value for all channels.
ChannelNoise parse_sigma(const std::string& text) {
  std::vector<double> v;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    try {
      std::size_t used = 0;
      v.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw InvalidParameter("--sigma: cannot parse '" + item + "'");
    }
  }
  if (v.size() == 1) return ChannelNoise(v[0], v[0], v[0]);
  if (v.size() == 3) return ChannelNoise(v[0], v[1], v[2]);
  throw InvalidParameter("--sigma expects r,g,b or a single value");
}

std::string format_sigma(const ChannelNoise& n) {
  std::ostringstream s;
  s << std::setprecision(6) << n.r() << ',' << n.g() << ',' << n.b();
  return s.str();
}

int threads_with_env(int flag) {
  const char* env = std::getenv("NNFN_THREADS");
  if (env == nullptr || *env == '\0') return flag;
  try {
    std::size_t used = 0;
    const int v = std::stoi(env, &used);
    if (used == std::string(env).size() && v >= 0) return v;
  } catch (const std::exception&) {
  }
  throw InvalidParameter(std::string("NNFN_THREADS must be a non-negative integer, got '") +
                         env + "'");
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("failed writing " + path.string());
}

json read_json_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read " + path.string());
  try {
    return json::parse(f);
  } catch (const json::parse_error& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void log_params(std::ostream& err, std::string_view command, const json& j) {
  err << "nnfn " << command << ": " << j.dump() << '\n';
}

struct DenoiseArgs {
  std::string input;
  std::string output;
  std::string sigma;
  std::string reference;
  std::string report;
  std::string diagnostics;
  std::string preset = "synthetic";
  std::string sigma_update = "fixed";
  std::string group_source = "noisy";
  std::string penalty_scale = "relative";
  std::string below_threshold = "sparse";
  std::string trace_groups = "first";
  std::uint64_t seed = 0;
  DenoiseParams params;
  CLI::Option* lambda = nullptr;
  CLI::Option* rho0 = nullptr;
  CLI::Option* alpha = nullptr;
};

void add_denoise(CLI::App& app, DenoiseArgs& a) {
  auto* sub = app.add_subcommand("denoise", "Denoise a color image");
  auto& p = a.params;
  auto& s = p.solver;
  sub->add_option("--input", a.input, "Noisy image (.png/.ppm)")->required();
  sub->add_option("--output", a.output, "Denoised image (.png/.ppm)")->required();
  sub->add_option("--sigma", a.sigma, "Noise std per channel: r,g,b (default: estimate)");
  sub->add_option("--preset", a.preset, "Parameter preset")
      ->check(CLI::IsMember({"synthetic", "real"}))
      ->capture_default_str();
  sub->add_option("--patch-size", p.patch_size)->capture_default_str();
  sub->add_option("--stride", p.stride)->capture_default_str();
  sub->add_option("--window", p.window, "Search window side")->capture_default_str();
  sub->add_option("--group-size", p.group_size)->capture_default_str();
  sub->add_option("--outer-iters", p.outer_iters)->capture_default_str();
  a.lambda = sub->add_option("--lambda", s.lambda)->capture_default_str();
  a.alpha = sub->add_option("--alpha", s.alpha)->capture_default_str();
  a.rho0 = sub->add_option("--rho0", s.rho0)->capture_default_str();
  sub->add_option("--mu", s.mu)->capture_default_str();
  sub->add_option("--inner-iters", s.max_iters)->capture_default_str();
  sub->add_option("--tol", s.tau)->capture_default_str();
  sub->add_option("--sigma-update", a.sigma_update)
      ->check(CLI::IsMember({"fixed", "residual"}))
      ->capture_default_str();
  sub->add_option("--residual-scale", p.residual_scale)->capture_default_str();
  sub->add_option("--group-source", a.group_source)
      ->check(CLI::IsMember({"noisy", "iterate"}))
      ->capture_default_str();
  sub->add_option("--penalty-scale", a.penalty_scale)
      ->check(CLI::IsMember({"relative", "absolute"}))
      ->capture_default_str();
  sub->add_option("--below-threshold", a.below_threshold)
      ->check(CLI::IsMember({"sparse", "zero"}))
      ->capture_default_str();
  sub->add_option("--threads", p.threads, "0 = all cores")->capture_default_str();
  sub->add_option("--seed", a.seed)->capture_default_str();
  sub->add_option("--reference", a.reference, "Clean image for per-iteration PSNR");
  sub->add_option("--report", a.report, "Write the run report (JSON)");
  sub->add_option("--diagnostics", a.diagnostics, "Write solver traces (CSV)");
  sub->add_option("--trace-groups", a.trace_groups)
      ->check(CLI::IsMember({"first", "all"}))
      ->capture_default_str();
}

int run_denoise(DenoiseArgs& a, std::ostream& out, std::ostream& err) {
  DenoiseParams& p = a.params;
  if (a.preset == "real") {
    if (a.lambda->count() == 0) p.solver.lambda = kRealLambda;
    if (a.rho0->count() == 0) p.solver.rho0 = kRealRho0;
    if (a.alpha->count() == 0) p.solver.alpha = kRealAlpha;
  }
  p.sigma_update = parse_sigma_update(a.sigma_update);
  p.group_source = parse_group_source(a.group_source);
  p.penalty_scale = parse_penalty_scale(a.penalty_scale);
  p.solver.below_threshold = parse_below_threshold(a.below_threshold);
  p.threads = threads_with_env(p.threads);
  p.validate();
  format_from_path(a.output);

  const ColorImage noisy = load_image(a.input);
  std::optional<ColorImage> reference;
  if (!a.reference.empty()) reference = load_image(a.reference);
  bool estimated = false;
  const ChannelNoise sigma = [&] {
    if (!a.sigma.empty()) return parse_sigma(a.sigma);
    estimated = true;
    return estimate_noise_mad(noisy);
  }();

  json resolved{{"input", a.input},
                {"output", a.output},
                {"preset", a.preset},
                {"sigma", sigma.sigmas()},
                {"sigma_estimated", estimated},
                {"seed", a.seed},
                {"threads_resolved", resolve_threads(p.threads)},
                {"svd_backend", svd_backend_name(svd_backend())},
                {"params", to_json(p)}};
  log_params(err, "denoise", resolved);

  DenoiseOptions options;
  options.reference = reference ? &*reference : nullptr;
  options.seed = a.seed;
  if (!a.diagnostics.empty()) {
    options.traces = a.trace_groups == "all" ? TraceCapture::all_groups
                                              : TraceCapture::first_group;
  }
  options.on_iteration = [&err](const OuterIterationReport& it) {
    err << "iter " << it.index << ": " << std::fixed << std::setprecision(2)
        << it.seconds << " s, " << it.admm_iterations << " ADMM steps";
    if (it.psnr) err << ", PSNR " << *it.psnr << " dB";
    err << '\n' << std::defaultfloat;
  };

  const DenoiseResult result = denoise(noisy, sigma, p, options);
  save_image(a.output, result.image);
  if (!a.report.empty()) write_file(a.report, to_json(result.report).dump(2) + "\n");
  if (!a.diagnostics.empty()) {
    std::ostringstream csv;
    write_group_traces_csv(csv, result.traces);
    write_file(a.diagnostics, csv.str());
  }
  out << a.output << '\n';
  return kSuccess;
}

struct SynthArgs {
  std::string input;
  std::string output;
  std::string sigma;
  std::uint64_t seed = 0;
  bool clip = false;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* sub = app.add_subcommand("synth", "Add Gaussian noise to a clean image");
  sub->add_option("--input", a.input, "Clean image")->required();
  sub->add_option("--output", a.output, "Default: <input stem>_noisy.png");
  sub->add_option("--sigma", a.sigma, "Noise std per channel: r,g,b")->required();
  sub->add_option("--seed", a.seed)->capture_default_str();
  sub->add_flag("--clip", a.clip, "Clip to [0, 255] (saving always clips)");
}

int run_synth(const SynthArgs& a, std::ostream& out, std::ostream& err) {
  const ChannelNoise sigma = parse_sigma(a.sigma);
  fs::path output = a.output;
  if (output.empty()) {
    const fs::path in(a.input);
    output = in.parent_path() / (in.stem().string() + "_noisy.png");
  }
  format_from_path(output);
  log_params(err, "synth",
             json{{"input", a.input},
                  {"output", output.string()},
                  {"sigma", sigma.sigmas()},
                  {"seed", a.seed},
                  {"clip", a.clip},
                  {"rng", "splitmix64-boxmuller-v1"}});
  const ColorImage clean = load_image(a.input);
  ColorImage noisy = add_awgn(clean, sigma, a.seed);
  if (a.clip) noisy = noisy.clipped();
  save_image(output, noisy);
  out << output.string() << '\n';
  return kSuccess;
}

struct BenchArgs {
  std::string config;
  std::string output_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

void add_bench(CLI::App& app, BenchArgs& a) {
  auto* sub = app.add_subcommand("bench", "Run an experiment config (JSON)");
  sub->add_option("--config", a.config, "Experiment config")->required();
  sub->add_option("--output-dir", a.output_dir, "Overrides config output_dir");
  sub->add_option("--seed", a.seed, "Overrides config seed");
  sub->add_option("--threads", a.threads, "Overrides config threads");
}

int run_bench(const BenchArgs& a, std::ostream& out, std::ostream& err) {
  ExperimentConfig config = experiment_config_from_json(read_json_file(a.config));
  if (!a.output_dir.empty()) config.output_dir = a.output_dir;
  if (a.seed) config.seed = *a.seed;
  if (a.threads) config.params.threads = *a.threads;
  config.params.threads = threads_with_env(config.params.threads);
  config.params.validate();
  log_params(err, "bench", to_json(config));

  const ExperimentReport report = run_experiment(config);
  for (const auto& row : report.per_image) {
    err << row.name << ": ";
    if (row.error) {
      err << "error: " << *row.error;
    } else if (row.psnr_denoised) {
      err << std::fixed << std::setprecision(2) << *row.psnr_noisy << " -> "
          << *row.psnr_denoised << " dB" << std::defaultfloat;
    } else {
      err << "done";
    }
    err << '\n';
  }
  write_table_csv(out, report);
  return kSuccess;
}

struct ProxCurveArgs {
  double t = 1.0;
  std::vector<double> alphas{0.0, 0.5, 1.0, 1.5, 1.9};
  double sigma_min = 0.0;
  double sigma_max = 4.0;
  int samples = 401;
  std::string below = "sparse";
  std::string output;
  std::uint64_t seed = 0;
};

void add_prox_curve(CLI::App& app, ProxCurveArgs& a) {
  auto* sub = app.add_subcommand("prox-curve", "Scalar shrinkage curves as CSV");
  sub->add_option("--t", a.t, "Threshold")->capture_default_str();
  sub->add_option("--alphas", a.alphas)->delimiter(',')->capture_default_str();
  sub->add_option("--sigma-min", a.sigma_min)->capture_default_str();
  sub->add_option("--sigma-max", a.sigma_max)->capture_default_str();
  sub->add_option("--samples", a.samples)->capture_default_str();
  sub->add_option("--below-threshold", a.below)
      ->check(CLI::IsMember({"sparse", "zero"}))
      ->capture_default_str();
  sub->add_option("--output", a.output, "CSV path (default: stdout)");
  sub->add_option("--seed", a.seed, "Accepted for uniformity; unused");
}

int run_prox_curve(const ProxCurveArgs& a, std::ostream& out, std::ostream& err) {
  if (a.sigma_min < 0.0 || a.sigma_max < a.sigma_min) {
    throw InvalidParameter("sigma range must satisfy 0 <= min <= max");
  }
  const BelowThreshold below = parse_below_threshold(a.below);
  log_params(err, "prox-curve",
             json{{"t", a.t},
                  {"alphas", a.alphas},
                  {"sigma_min", a.sigma_min},
                  {"sigma_max", a.sigma_max},
                  {"samples", a.samples},
                  {"below_threshold", a.below}});
  const auto points = export_shrinkage_curve(
      a.t, a.alphas, linspace(a.sigma_min, a.sigma_max, a.samples), below);
  if (a.output.empty()) {
    write_shrinkage_csv(out, points);
  } else {
    std::ostringstream csv;
    write_shrinkage_csv(csv, points);
    write_file(a.output, csv.str());
  }
  return kSuccess;
}

struct EstimateArgs {
  std::string input;
  std::uint64_t seed = 0;
};

void add_estimate(CLI::App& app, EstimateArgs& a) {
  auto* sub = app.add_subcommand("estimate-noise", "Print MAD noise estimates r,g,b");
  sub->add_option("--input", a.input, "Image")->required();
  sub->add_option("--seed", a.seed, "Accepted for uniformity; unused");
}

int run_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err) {
  log_params(err, "estimate-noise", json{{"input", a.input}, {"method", "mad"}});
  out << format_sigma(estimate_noise_mad(load_image(a.input))) << '\n';
  return kSuccess;
}

}  // namespace

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err) {
  CLI::App app{"Color image denoising with the nuclear-minus-Frobenius norm model",
               "nnfn"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  DenoiseArgs denoise_args;
  SynthArgs synth_args;
  BenchArgs bench_args;
  ProxCurveArgs prox_args;
  EstimateArgs estimate_args;
  add_denoise(app, denoise_args);
  add_synth(app, synth_args);
  add_bench(app, bench_args);
  add_prox_curve(app, prox_args);
  add_estimate(app, estimate_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "nnfn: " << e.what() << '\n';
    return kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (name == "denoise") return run_denoise(denoise_args, out, err);
    if (name == "synth") return run_synth(synth_args, out, err);
    if (name == "bench") return run_bench(bench_args, out, err);
    if (name == "prox-curve") return run_prox_curve(prox_args, out, err);
    return run_estimate(estimate_args, out, err);
  } catch (const InvalidParameter& e) {
    err << "nnfn " << name << ": " << e.what() << '\n';
    return kUsage;
  } catch (const IoError& e) {
    err << "nnfn " << name << ": " << e.what() << '\n';
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "nnfn " << name << ": " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "nnfn " << name << ": " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace nnfn::cli
