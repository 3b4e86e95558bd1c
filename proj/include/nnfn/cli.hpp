#pragma once

#include <iosfwd>

namespace nnfn::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsage = 1,
  kIo = 2,
  kNumerical = 3,
};

/// Entry point behind the `nnfn` binary: denoise, synth, bench, prox-curve,
/// estimate-noise. Logs go to `err`, machine-readable output to `out`.
int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out,
                       std::ostream& err);

}  // namespace nnfn::cli
