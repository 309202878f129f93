#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "prism/model.hpp"

namespace prism {

// Minimum-cost perfect matching on a square cost matrix. Returns assignment
// with assignment[col] = row, i.e. column j of the cost matrix is matched to
// row assignment[j].
std::vector<Eigen::Index> hungarian(const Eigen::MatrixXd& cost);

struct MseResult {
  double value = 0.0;
  // Column n of A_hat is matched with column permutation[n] of A0.
  std::vector<Eigen::Index> permutation;
};

MseResult mse(const VertexMatrix& A0, const VertexMatrix& A_hat);

struct SadResult {
  Eigen::VectorXd angles_deg;  // per column of A_hat, under the permutation
  double mean_deg = 0.0;
  std::vector<Eigen::Index> permutation;
};

SadResult sad(const VertexMatrix& A0, const VertexMatrix& A_hat);

struct MomentReport {
  Eigen::VectorXd mean_z;  // per coordinate
  Eigen::MatrixXd cov_z;   // per entry, symmetric
  double max_abs_mean_z = 0.0;
  double max_abs_cov_z = 0.0;
};

// z-scores of the sample mean against A0 1/N and of the sample covariance
// against (1/((N+1)N)) (A0 U)(A0 U)^T + sigma^2 I; nullopt without truth.
std::optional<MomentReport> moment_diagnostics(const Dataset& ds);

std::string format_metrics_table(const std::vector<std::string>& labels,
                                 const std::vector<double>& mse_values,
                                 const std::vector<double>& sad_values);

}  // namespace prism
