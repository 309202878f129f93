#pragma once

// Convex-geometry evaluators: simplex projection, the polyhedral form of a
// full-dimensional simplex, and the volume-minimisation objectives that
// approximate the maximum-likelihood criterion.

#include <Eigen/Dense>

#include <optional>

#include "prism/model.hpp"

namespace prism {

struct SimplexProjection {
  Eigen::VectorXd s;  // minimiser over the closed unit simplex
  double dist_sq = 0.0;
  int iterations = 0;
};

// argmin_{s in simplex} ||y - A s||^2 by a primal active-set method. Face
// subproblems are solved as minimum-norm least squares in a basis of
// {p : 1^T p = 0}, so rank-deficient A is handled.
SimplexProjection project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& y,
                                     const VertexMatrix& A);

// y in the open hull of A (relative to aff(A)) via the projection.
bool in_open_hull(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A);

// Squared distance from y to aff(A).
double affine_residual_sq(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A);

// log svol(A) when every column of Y lies in the open hull of A; nullopt marks
// infeasibility. Requires M = N - 1.
std::optional<double> noiseless_svmin_objective(const VertexMatrix& A, const Eigen::MatrixXd& Y);

// log svol(A) + ||Y - A S||^2 / (lambda T). Requires M = N - 1.
double edge_smooth_objective(const VertexMatrix& A, const Eigen::MatrixXd& S,
                             const Eigen::MatrixXd& Y, double lambda);
// Same objective with S at the per-point simplex projections.
double edge_smooth_objective(const VertexMatrix& A, const Eigen::MatrixXd& Y, double lambda);

// Halfspaces b_i^T y >= c_i, i = 1..N, with (bN, cN) the N-th facet.
struct PolyhedralForm {
  Eigen::MatrixXd B;  // columns b_1..b_{N-1}
  Eigen::VectorXd c;
  Eigen::VectorXd bN;
  double cN = 0.0;

  static PolyhedralForm from(Eigen::MatrixXd B, Eigen::VectorXd c);
  Eigen::Index dim() const { return B.rows(); }
  Eigen::Index facets() const { return B.cols() + 1; }
  Eigen::VectorXd normal(Eigen::Index i) const { return i + 1 < facets() ? B.col(i) : bN; }
  double offset(Eigen::Index i) const { return i + 1 < facets() ? c(i) : cN; }
  bool contains(const Eigen::Ref<const Eigen::VectorXd>& y) const;
};

PolyhedralForm simplex_to_polyhedron(const VertexMatrix& A);
VertexMatrix polyhedron_to_simplex(const PolyhedralForm& P);

// -log|det B| + (1/(lambda T)) sum_t sum_i (c_i - b_i^T y_t)_+ ; +inf for
// singular B.
double sisal_objective(const PolyhedralForm& P, const Eigen::MatrixXd& Y, double lambda);

// log Phi(x), with a continued-fraction Mills ratio in the deep left tail.
double log_normal_cdf(double x);

// -log|det B| + (1/T) sum_t max_i -log Phi((b_i^T y_t - c_i) / (sigma ||b_i||)).
double chance_objective(const PolyhedralForm& P, const Eigen::MatrixXd& Y, double sigma);

// Upper bound on p(y; A): min_i Phi((b_i^T y - c_i)/(sigma ||b_i||)) / svol(A).
double chance_bound_pdf(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                        double sigma);
// Its logarithm, finite far outside the hull where the bound underflows.
double log_chance_bound_pdf(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                            double sigma);

// Edge-smooth surrogate for M >= N - 1:
//   log svol(A) + ||Y - A S*||^2/(lambda T)
//     + (1/(2 sigma^2) - 1/lambda) (1/T) sum_t dist(y_t, aff(A))^2.
double generalized_edge_smooth(const VertexMatrix& A, const Eigen::MatrixXd& Y, double lambda,
                               double sigma);

}  // namespace prism
