#pragma once

// Monte Carlo EM with rejection sampling from the simplex-truncated Gaussian
// posterior.

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "prism/geometry.hpp"
#include "prism/model.hpp"
#include "prism/report.hpp"
#include "prism/rng.hpp"

namespace prism {

struct IsaConfig {
  int proposals_per_point = 500;
  int max_iters = 100;
  // Extra proposal rounds are drawn until this many samples are accepted
  // (bounded by max_extra_rounds). Zero keeps a single round per point.
  int min_accepted = 0;
  int max_extra_rounds = 20;
  std::uint64_t seed = 0;
  double rel_tol = 1e-6;
  // Acceptance rate below which the collapse diagnostic fires.
  double collapse_rate = 1e-3;
  // Consecutive iterations with zero accepted samples before aborting.
  int abort_patience = 3;

  void validate() const;
  bool operator==(const IsaConfig&) const = default;
};

struct PosteriorBatch {
  Eigen::MatrixXd samples;  // N x R_t accepted draws
  int proposed = 0;
  // MC estimate of log p(y; A) from the uniform proposals.
  double loglik = 0.0;
  SimplexProjection projection;

  Eigen::Index accepted() const { return samples.cols(); }
};

// Uniform proposals xi accepted with probability
// exp(-(||y - A xi||^2 - d^2) / (2 sigma^2)), d^2 the squared distance from y
// to conv(A).
PosteriorBatch sample_posterior(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                                double sigma, int R, Rng& rng, int min_accepted = 0,
                                int max_extra_rounds = 0);
PosteriorBatch sample_posterior(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                                double sigma, int R, std::uint64_t seed);

// A = (sum_t y_t m_t^T)(sum_t R_t)^+ over the points with nonempty batches.
VertexMatrix mcem_update(const Eigen::MatrixXd& Y, const std::vector<Eigen::MatrixXd>& batches);

SolverReport isa_prism(const Eigen::MatrixXd& Y, const IsaConfig& cfg, const VertexMatrix& A_init,
                       double sigma, const MseProbe& probe = {});

}  // namespace prism
