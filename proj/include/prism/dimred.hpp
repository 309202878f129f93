#pragma once

#include <Eigen/Dense>

#include "prism/model.hpp"

namespace prism {

// Affine coordinates y = Q z + mu on the (N-1)-dimensional principal subspace.
struct AffineChart {
  Eigen::MatrixXd Q;  // M x (N-1), Q^T Q = I
  Eigen::VectorXd mu;

  Eigen::Index ambient_dim() const { return Q.rows(); }
  Eigen::Index reduced_dim() const { return Q.cols(); }
  void validate() const;
};

struct Reduction {
  Eigen::MatrixXd Z;  // (N-1) x T
  AffineChart chart;
  // Mean squared distance from y_t to its reconstruction mu + Q z_t.
  double residual_energy = 0.0;
};

// Principal-subspace reduction of Y to N-1 dimensions. Uses the M x M sample
// covariance for M <= 2000 and the T x T Gram matrix otherwise. Eigenvector
// signs make each column's largest-magnitude entry positive.
Reduction reduce(const Eigen::MatrixXd& Y, Eigen::Index N);

// z = Q^T (y - mu) for every column.
Eigen::MatrixXd project(const Eigen::MatrixXd& Y, const AffineChart& chart);

// Q B + mu 1^T.
VertexMatrix lift(const VertexMatrix& B, const AffineChart& chart);

}  // namespace prism
