#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "prism/model.hpp"

namespace prism {

enum class SolverStatus { Converged, MaxIterations, Aborted };

const char* to_string(SolverStatus status);

// Per-run trace shared by both solvers; fields a solver does not produce stay
// empty.
struct SolverReport {
  std::string method;
  VertexMatrix A;
  SolverStatus status = SolverStatus::MaxIterations;
  int iterations = 0;
  double wall_seconds = 0.0;

  std::vector<double> rel_change;
  std::vector<double> mse;  // filled when a probe is supplied

  // ISA
  std::vector<double> acceptance_rate;
  std::vector<double> loglik;  // mean MC log-likelihood at the iterate
  std::vector<int> empty_batches;
  bool acceptance_collapse = false;

  // VIA
  std::vector<double> objective;  // variational objective after each sweep
  std::vector<double> eta_min;
  std::vector<double> eta_median;
  std::vector<double> eta_max;
  std::vector<double> admm_iters_mean;
  std::vector<int> admm_iters_max;
  bool used_pinv = false;

  std::vector<std::string> warnings;
  std::map<std::string, std::string> notes;
};

// Maps a solver-space estimate to its error against the truth.
using MseProbe = std::function<double(const VertexMatrix&)>;

}  // namespace prism
