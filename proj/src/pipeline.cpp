#include "nnfn/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>

#include "nnfn/errors.hpp"
#include "nnfn/harness.hpp"

namespace nnfn {

using nlohmann::json;

namespace {

// Groups solved between two aggregation steps. Fixed so the merge order, and
// therefore the output bits, never depend on the thread count.
constexpr std::size_t kChunk = 256;

struct GroupOutcome {
  PatchMatrix estimate;
  int iterations = 0;
  int bound_warnings = 0;
  std::vector<IterationRecord> trace;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string key_string(PatchCoord c) {
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

// Runs fn(i) for i in [begin, end) on `threads` workers. Exceptions are kept
// per index and the lowest failing index is rethrown after all workers join.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, int threads, Fn&& fn) {
  const std::size_t n = end - begin;
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(begin + i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int spawn = static_cast<int>(
      std::min<std::size_t>(static_cast<std::size_t>(threads), n));
  if (spawn <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(spawn));
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

void DenoiseParams::validate() const {
  if (patch_size < 1) throw InvalidParameter("patch size must be >= 1");
  if (stride < 1) throw InvalidParameter("stride must be >= 1");
  // Wider strides leave pixels between key patches uncovered.
  if (stride > patch_size) throw InvalidParameter("stride must be <= patch size");
  if (window < patch_size) {
    throw InvalidParameter("search window must be >= patch size");
  }
  if (group_size < 1) throw InvalidParameter("group size must be >= 1");
  if (outer_iters < 1) throw InvalidParameter("outer iterations must be >= 1");
  if (!(residual_scale > 0.0 && residual_scale <= 1.0)) {
    throw InvalidParameter("residual scale must be in (0, 1]");
  }
  if (threads < 0) throw InvalidParameter("threads must be >= 0");
  solver.validate();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

ChannelNoise sigma_residual_update(const ChannelNoise& noise,
                                   const ColorImage& noisy_original,
                                   const ColorImage& current, double scale) {
  if (noisy_original.height() != current.height() ||
      noisy_original.width() != current.width()) {
    throw InvalidParameter("residual update: image dimensions differ");
  }
  if (!(scale > 0.0 && scale <= 1.0)) {
    throw InvalidParameter("residual scale must be in (0, 1]");
  }
  std::array<double, 3> mse{};
  const auto y = noisy_original.data();
  const auto x = current.data();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - x[i];
    mse[i % kChannels] += d * d;
  }
  const double pixels = static_cast<double>(y.size() / kChannels);
  std::array<double, 3> out{};
  for (int c = 0; c < kChannels; ++c) {
    const double var = noise[c] * noise[c] - mse[c] / pixels;
    out[c] = scale * std::sqrt(std::max(var, kResidualSigmaFloor));
  }
  return ChannelNoise(out[0], out[1], out[2]);
}

DenoiseResult denoise(const ColorImage& noisy, const ChannelNoise& noise,
                      const DenoiseParams& params,
                      const DenoiseOptions& options) {
  params.validate();
  const int p = params.patch_size;
  if (noisy.height() < p || noisy.width() < p) {
    throw InvalidParameter("image is smaller than the patch size");
  }
  if (!noisy.all_finite()) throw InvalidParameter("image has non-finite values");
  if (options.reference != nullptr &&
      (options.reference->height() != noisy.height() ||
       options.reference->width() != noisy.width())) {
    throw InvalidParameter("reference image dimensions differ from input");
  }

  pin_blas_to_single_thread();
  const int threads = resolve_threads(params.threads);
  const auto run_start = std::chrono::steady_clock::now();

  const std::vector<PatchCoord> keys = extract_key_patches(noisy, p, params.stride);

  DenoiseResult result;
  result.report.params = params;
  result.report.sigma = noise.sigmas();
  result.report.groups = static_cast<int>(keys.size());
  result.report.seed = options.seed;

  ColorImage estimate = noisy;
  ChannelNoise sigma = noise;

  for (int outer = 1; outer <= params.outer_iters; ++outer) {
    const auto iter_start = std::chrono::steady_clock::now();
    if (params.sigma_update == SigmaUpdate::residual && outer > 1) {
      sigma = sigma_residual_update(noise, noisy, estimate, params.residual_scale);
    }
    const WeightMatrix w = make_weight_matrix(sigma, p);
    SolverParams solver = params.solver;
    if (params.penalty_scale == PenaltyScale::relative) {
      solver.rho0 *= w.mean_gram();
    }

    const ColorImage& match_source = estimate;
    const ColorImage& data_source =
        params.group_source == GroupSource::noisy ? noisy : estimate;

    OuterIterationReport it;
    it.index = outer;
    it.sigma = sigma.sigmas();
    it.groups = static_cast<int>(keys.size());

    Aggregator acc(noisy.height(), noisy.width());
    std::vector<GroupOutcome> slots(kChunk);
    for (std::size_t begin = 0; begin < keys.size(); begin += kChunk) {
      const std::size_t end = std::min(keys.size(), begin + kChunk);
      parallel_for(begin, end, threads, [&](std::size_t g) {
        const PatchCoord key = keys[g];
        try {
          const auto coords = block_match_coords(match_source, key, p,
                                                 params.window, params.group_size);
          PatchMatrix group = form_patch_matrix(data_source, coords, p);
          SolveResult solved = solve(group.data, w, solver);
          GroupOutcome& out = slots[g - begin];
          group.data = std::move(solved.estimate);
          out.estimate = std::move(group);
          out.iterations = solved.iterations;
          out.bound_warnings = solved.bound_warnings;
          const bool keep_trace =
              options.traces == TraceCapture::all_groups ||
              (options.traces == TraceCapture::first_group && g == 0);
          if (keep_trace) {
            out.trace = std::move(solved.trace);
          } else {
            out.trace.clear();
          }
        } catch (const NumericalError& e) {
          throw NumericalError("group " + std::to_string(g) + " at key patch " +
                               key_string(key) + ", outer iteration " +
                               std::to_string(outer) + ": " + e.what());
        }
      });
      for (std::size_t g = begin; g < end; ++g) {
        GroupOutcome& out = slots[g - begin];
        acc.add(out.estimate);
        it.admm_iterations += out.iterations;
        it.bound_warnings += out.bound_warnings;
        if (!out.trace.empty()) {
          result.traces.push_back(
              {outer, static_cast<int>(g), keys[g], std::move(out.trace)});
          out.trace.clear();
        }
      }
    }
    estimate = acc.finish();

    if (options.reference != nullptr) {
      it.psnr = psnr(*options.reference, estimate.clipped());
    }
    it.seconds = seconds_since(iter_start);
    if (options.on_iteration) options.on_iteration(it);
    result.report.iterations.push_back(it);
  }

  result.image = estimate.clipped();
  result.report.seconds = seconds_since(run_start);
  return result;
}

void write_group_traces_csv(std::ostream& out,
                            const std::vector<GroupTrace>& traces) {
  out << "outer,group,key_row,key_col,"
         "k,x_minus_z,x_change,z_change,multiplier_norm,rho,objective\n";
  for (const auto& gt : traces) {
    std::ostringstream rows;
    write_trace_csv(rows, gt.trace, false);
    std::istringstream lines(rows.str());
    for (std::string line; std::getline(lines, line);) {
      out << gt.outer << ',' << gt.group << ',' << gt.key.row << ','
          << gt.key.col << ',' << line << '\n';
    }
  }
}

std::string_view to_string(SigmaUpdate v) {
  return v == SigmaUpdate::fixed ? "fixed" : "residual";
}
std::string_view to_string(GroupSource v) {
  return v == GroupSource::noisy ? "noisy" : "iterate";
}
std::string_view to_string(PenaltyScale v) {
  return v == PenaltyScale::relative ? "relative" : "absolute";
}
std::string_view to_string(BelowThreshold v) {
  return v == BelowThreshold::sparse ? "sparse" : "zero";
}

SigmaUpdate parse_sigma_update(std::string_view s) {
  if (s == "fixed") return SigmaUpdate::fixed;
  if (s == "residual") return SigmaUpdate::residual;
  throw InvalidParameter("sigma update must be fixed or residual, got '" +
                         std::string(s) + "'");
}
GroupSource parse_group_source(std::string_view s) {
  if (s == "noisy") return GroupSource::noisy;
  if (s == "iterate") return GroupSource::iterate;
  throw InvalidParameter("group source must be noisy or iterate, got '" +
                         std::string(s) + "'");
}
PenaltyScale parse_penalty_scale(std::string_view s) {
  if (s == "relative") return PenaltyScale::relative;
  if (s == "absolute") return PenaltyScale::absolute;
  throw InvalidParameter("penalty scale must be relative or absolute, got '" +
                         std::string(s) + "'");
}
BelowThreshold parse_below_threshold(std::string_view s) {
  if (s == "sparse") return BelowThreshold::sparse;
  if (s == "zero") return BelowThreshold::zero;
  throw InvalidParameter("below_threshold must be sparse or zero, got '" +
                         std::string(s) + "'");
}

json to_json(const SolverParams& p) {
  return json{{"lambda", p.lambda},
              {"alpha", p.alpha},
              {"rho0", p.rho0},
              {"mu", p.mu},
              {"tau", p.tau},
              {"max_iters", p.max_iters},
              {"below_threshold", to_string(p.below_threshold)},
              {"record_objective", p.record_objective}};
}

json to_json(const DenoiseParams& p) {
  return json{{"patch_size", p.patch_size},
              {"stride", p.stride},
              {"window", p.window},
              {"group_size", p.group_size},
              {"outer_iters", p.outer_iters},
              {"solver", to_json(p.solver)},
              {"sigma_update", to_string(p.sigma_update)},
              {"residual_scale", p.residual_scale},
              {"group_source", to_string(p.group_source)},
              {"penalty_scale", to_string(p.penalty_scale)},
              {"threads", p.threads}};
}

json to_json(const RunReport& r) {
  json iterations = json::array();
  for (const auto& it : r.iterations) {
    iterations.push_back({{"index", it.index},
                          {"psnr", it.psnr ? json(*it.psnr) : json(nullptr)},
                          {"seconds", it.seconds},
                          {"sigma", it.sigma},
                          {"groups", it.groups},
                          {"admm_iterations", it.admm_iterations},
                          {"bound_warnings", it.bound_warnings}});
  }
  return json{{"version", r.version},
              {"params", to_json(r.params)},
              {"sigma", r.sigma},
              {"groups", r.groups},
              {"seconds", r.seconds},
              {"seed", r.seed ? json(*r.seed) : json(nullptr)},
              {"iterations", iterations}};
}

namespace {

template <typename T>
void read(const json& j, const char* key, T& field) {
  if (!j.contains(key)) return;
  try {
    field = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InvalidParameter(std::string("config field '") + key + "': " + e.what());
  }
}

std::string read_string(const json& j, const char* key, std::string fallback) {
  read(j, key, fallback);
  return fallback;
}

}  // namespace

SolverParams solver_params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("solver params must be an object");
  SolverParams p;
  read(j, "lambda", p.lambda);
  read(j, "alpha", p.alpha);
  read(j, "rho0", p.rho0);
  read(j, "mu", p.mu);
  read(j, "tau", p.tau);
  read(j, "max_iters", p.max_iters);
  read(j, "record_objective", p.record_objective);
  p.below_threshold = parse_below_threshold(
      read_string(j, "below_threshold", std::string(to_string(p.below_threshold))));
  return p;
}

DenoiseParams denoise_params_from_json(const json& j) {
  if (!j.is_object()) throw InvalidParameter("denoise params must be an object");
  DenoiseParams p;
  read(j, "patch_size", p.patch_size);
  read(j, "stride", p.stride);
  read(j, "window", p.window);
  read(j, "group_size", p.group_size);
  read(j, "outer_iters", p.outer_iters);
  read(j, "residual_scale", p.residual_scale);
  read(j, "threads", p.threads);
  if (j.contains("solver")) p.solver = solver_params_from_json(j.at("solver"));
  p.sigma_update = parse_sigma_update(
      read_string(j, "sigma_update", std::string(to_string(p.sigma_update))));
  p.group_source = parse_group_source(
      read_string(j, "group_source", std::string(to_string(p.group_source))));
  p.penalty_scale = parse_penalty_scale(
      read_string(j, "penalty_scale", std::string(to_string(p.penalty_scale))));
  return p;
}

}  // namespace nnfn
