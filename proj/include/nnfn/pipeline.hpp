#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "nnfn/image.hpp"
#include "nnfn/noise_model.hpp"
#include "nnfn/patch_engine.hpp"
#include "nnfn/solver.hpp"

namespace nnfn {

inline constexpr std::string_view kVersion = "0.1.0";

enum class SigmaUpdate { fixed, residual };

/// Which image the patch values of a group are read from. Matching always
/// runs on the current iterate.
enum class GroupSource { noisy, iterate };

/// How SolverParams::rho0 is read. `relative` multiplies it by the mean of
/// σ_c⁻², so the penalty is measured against the fidelity curvature and does
/// not depend on the intensity scale; `absolute` passes it through.
enum class PenaltyScale { relative, absolute };

struct DenoiseParams {
  int patch_size = 6;
  int stride = 4;
  int window = 20;
  int group_size = 60;
  int outer_iters = 5;
  SolverParams solver;
  SigmaUpdate sigma_update = SigmaUpdate::fixed;
  double residual_scale = 1.0;
  GroupSource group_source = GroupSource::noisy;
  PenaltyScale penalty_scale = PenaltyScale::relative;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  int threads = 0;

  void validate() const;
};

struct OuterIterationReport {
  int index = 0;  // 1-based
  std::optional<double> psnr;
  double seconds = 0.0;
  std::array<double, 3> sigma{};
  int groups = 0;
  long long admm_iterations = 0;
  int bound_warnings = 0;
};

struct RunReport {
  DenoiseParams params;
  std::array<double, 3> sigma{};
  std::vector<OuterIterationReport> iterations;
  int groups = 0;  // key patches per outer iteration
  double seconds = 0.0;
  std::optional<std::uint64_t> seed;
  std::string version{kVersion};
};

/// Solver trace of one group, tagged with where it came from.
struct GroupTrace {
  int outer = 0;
  int group = 0;
  PatchCoord key;
  std::vector<IterationRecord> trace;
};

enum class TraceCapture { none, first_group, all_groups };

struct DenoiseOptions {
  /// Ground truth for per-iteration PSNR.
  const ColorImage* reference = nullptr;
  /// Echoed into the report only.
  std::optional<std::uint64_t> seed;
  TraceCapture traces = TraceCapture::none;
  /// Called after every outer iteration.
  std::function<void(const OuterIterationReport&)> on_iteration;
};

struct DenoiseResult {
  ColorImage image;  // clipped to [0, 255]
  RunReport report;
  std::vector<GroupTrace> traces;
};

/// Outer loop: match on the current iterate, solve every group, aggregate.
/// Numerical failures are rethrown as NumericalError naming the key patch.
DenoiseResult denoise(const ColorImage& noisy, const ChannelNoise& noise,
                      const DenoiseParams& params,
                      const DenoiseOptions& options = {});

inline constexpr double kResidualSigmaFloor = 1e-6;

/// σ_c' = scale * sqrt(max(σ_c² - mean((y_c - x_c)²), 1e-6)).
ChannelNoise sigma_residual_update(const ChannelNoise& noise,
                                   const ColorImage& noisy_original,
                                   const ColorImage& current, double scale);

/// CSV with header outer,group,key_row,key_col followed by the solver trace
/// columns.
void write_group_traces_csv(std::ostream& out,
                            const std::vector<GroupTrace>& traces);

/// Threads actually used for a DenoiseParams::threads value.
int resolve_threads(int requested);

std::string_view to_string(SigmaUpdate v);
std::string_view to_string(GroupSource v);
std::string_view to_string(PenaltyScale v);
std::string_view to_string(BelowThreshold v);
SigmaUpdate parse_sigma_update(std::string_view s);
GroupSource parse_group_source(std::string_view s);
PenaltyScale parse_penalty_scale(std::string_view s);
BelowThreshold parse_below_threshold(std::string_view s);

nlohmann::json to_json(const SolverParams& p);
nlohmann::json to_json(const DenoiseParams& p);
nlohmann::json to_json(const RunReport& r);
/// Missing keys keep their defaults; wrong types throw InvalidParameter.
SolverParams solver_params_from_json(const nlohmann::json& j);
DenoiseParams denoise_params_from_json(const nlohmann::json& j);

}  // namespace nnfn
