#include "prism/dimred.hpp"

#include <Eigen/Eigenvalues>

#include "prism/errors.hpp"

namespace prism {

namespace {

constexpr Eigen::Index kCovarianceLimit = 2000;

void fix_signs(Eigen::MatrixXd& Q) {
  for (Eigen::Index j = 0; j < Q.cols(); ++j) {
    Eigen::Index imax = 0;
    Q.col(j).cwiseAbs().maxCoeff(&imax);
    if (Q(imax, j) < 0.0) Q.col(j) *= -1.0;
  }
}

}  // namespace

void AffineChart::validate() const {
  if (Q.rows() != mu.size()) throw ShapeError("AffineChart: Q rows differ from mu length");
  const Eigen::MatrixXd gram = Q.transpose() * Q;
  if ((gram - Eigen::MatrixXd::Identity(Q.cols(), Q.cols())).cwiseAbs().maxCoeff() > 1e-10) {
    throw ModelError("AffineChart: Q is not semi-orthogonal");
  }
}

Reduction reduce(const Eigen::MatrixXd& Y, Eigen::Index N) {
  const Eigen::Index M = Y.rows();
  const Eigen::Index T = Y.cols();
  if (N < 2) throw ShapeError("reduce: model order N must be at least 2");
  if (M < N - 1) throw ShapeError("reduce: need M >= N-1");
  if (T < N) throw InsufficientDataError("reduce: need at least N observations");

  Reduction out;
  out.chart.mu = Y.rowwise().mean();
  const Eigen::MatrixXd Yc = Y.colwise() - out.chart.mu;
  const double invT = 1.0 / static_cast<double>(T);
  const Eigen::Index k = N - 1;

  if (M <= kCovarianceLimit) {
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(M, M);
    C.selfadjointView<Eigen::Lower>().rankUpdate(Yc, invT);
    C = C.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C);
    // Eigenvalues ascend; take the trailing k columns in descending order.
    out.chart.Q = eig.eigenvectors().rightCols(k).rowwise().reverse();
  } else {
    Eigen::MatrixXd G = invT * (Yc.transpose() * Yc);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
    const Eigen::MatrixXd V = eig.eigenvectors().rightCols(k).rowwise().reverse();
    out.chart.Q = Yc * V;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double nrm = out.chart.Q.col(j).norm();
      if (nrm > 0.0) out.chart.Q.col(j) /= nrm;
    }
  }
  fix_signs(out.chart.Q);
  out.Z = out.chart.Q.transpose() * Yc;
  out.residual_energy = (Yc - out.chart.Q * out.Z).colwise().squaredNorm().mean();
  return out;
}

Eigen::MatrixXd project(const Eigen::MatrixXd& Y, const AffineChart& chart) {
  if (Y.rows() != chart.ambient_dim()) throw ShapeError("project: Y rows differ from chart");
  return chart.Q.transpose() * (Y.colwise() - chart.mu);
}

VertexMatrix lift(const VertexMatrix& B, const AffineChart& chart) {
  if (B.rows() != chart.reduced_dim()) throw ShapeError("lift: B rows differ from chart");
  VertexMatrix A = chart.Q * B;
  A.colwise() += chart.mu;
  return A;
}

}  // namespace prism
