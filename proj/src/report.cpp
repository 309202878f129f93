#include "prism/report.hpp"

namespace prism {

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged:
      return "converged";
    case SolverStatus::MaxIterations:
      return "max_iterations";
    case SolverStatus::Aborted:
      return "aborted";
  }
  return "unknown";
}

}  // namespace prism
