#pragma once

#include <ostream>

namespace prism {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUserError = 1;
inline constexpr int kExitSolverFailure = 2;

// Subcommands synth, fit, eval, sweep, objective. Results go to files under
// --out; human-readable summaries to out, progress and warnings to err.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace prism
