#pragma once

// End-to-end runs: dimension reduction, pure-pixel initialisation, solver and
// lifting back to the ambient space; synthetic trials and parameter sweeps.

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prism/config.hpp"
#include "prism/dimred.hpp"
#include "prism/model.hpp"
#include "prism/report.hpp"

namespace prism {

struct FitOutcome {
  VertexMatrix A;       // ambient estimate
  VertexMatrix A_init;  // ambient initialiser
  SolverReport report;  // report.A is in solver coordinates
  std::optional<AffineChart> chart;
  double sigma = 0.0;
};

// Noise level used when the data are noiseless: this fraction of the RMS
// distance of the observations from their mean.
inline constexpr double kNoiselessSigmaFraction = 1e-3;

// Fits cfg.fit.method to ds. N and sigma come from cfg.fit or the ground
// truth; ConfigError when neither provides them.
FitOutcome fit_dataset(const Dataset& ds, const RunConfig& cfg);

// Element-wise Uniform[0, 1] vertex matrix, redrawn until affinely
// independent.
VertexMatrix random_vertices(Eigen::Index M, Eigen::Index N, std::uint64_t seed);

struct SweepRow {
  std::string variable;
  double value = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  std::string method;
  double mse = 0.0;
  double group_mean = 0.0;  // over trials at this (value, method)
  double group_sd = 0.0;
};

// One row per (grid value, trial, method) in that order. Trial seeds are
// derive_seed(cfg.seed, grid index, trial) and every method of a trial sees
// the same data.
std::vector<SweepRow> run_sweep(const RunConfig& cfg);

void write_sweep_csv(const std::filesystem::path& path, const std::vector<SweepRow>& rows);

}  // namespace prism
