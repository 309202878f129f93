#include "prism/eval.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

#include "prism/errors.hpp"
#include "prism/mathcore.hpp"

namespace prism {

std::vector<Eigen::Index> hungarian(const Eigen::MatrixXd& cost) {
  const Eigen::Index n = cost.rows();
  if (cost.cols() != n) throw ShapeError("hungarian: cost matrix must be square");
  if (!cost.allFinite()) throw DomainError("hungarian: non-finite cost");
  // Potentials formulation, 1-based with a sentinel column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<Eigen::Index> p(n + 1, 0), way(n + 1, 0);
  for (Eigen::Index i = 1; i <= n; ++i) {
    p[0] = i;
    Eigen::Index j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const Eigen::Index i0 = p[j0];
      double delta = inf;
      Eigen::Index j1 = 0;
      for (Eigen::Index j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Eigen::Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const Eigen::Index j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Eigen::Index> assignment(n);
  for (Eigen::Index j = 1; j <= n; ++j) assignment[j - 1] = p[j] - 1;
  return assignment;
}

MseResult mse(const VertexMatrix& A0, const VertexMatrix& A_hat) {
  if (A0.rows() != A_hat.rows() || A0.cols() != A_hat.cols()) {
    throw ShapeError("mse: shape mismatch");
  }
  const Eigen::Index N = A0.cols();
  Eigen::MatrixXd cost(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) cost(i, j) = (A0.col(i) - A_hat.col(j)).squaredNorm();
  }
  MseResult out;
  out.permutation = hungarian(cost);
  double acc = 0.0;
  for (Eigen::Index n = 0; n < N; ++n) acc += cost(out.permutation[n], n);
  out.value = acc / static_cast<double>(A0.rows() * N);
  return out;
}

namespace {

double angle(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double c = a.dot(b) / (a.norm() * b.norm());
  return std::acos(std::clamp(c, -1.0, 1.0));
}

}  // namespace

SadResult sad(const VertexMatrix& A0, const VertexMatrix& A_hat) {
  if (A0.rows() != A_hat.rows() || A0.cols() != A_hat.cols()) {
    throw ShapeError("sad: shape mismatch");
  }
  if ((A0.colwise().norm().array() == 0.0).any() ||
      (A_hat.colwise().norm().array() == 0.0).any()) {
    throw DomainError("sad: zero column");
  }
  const Eigen::Index N = A0.cols();
  Eigen::MatrixXd cost(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) cost(i, j) = angle(A0.col(i), A_hat.col(j));
  }
  SadResult out;
  out.permutation = hungarian(cost);
  out.angles_deg.resize(N);
  for (Eigen::Index n = 0; n < N; ++n) {
    out.angles_deg(n) = cost(out.permutation[n], n) * 180.0 / std::numbers::pi;
  }
  out.mean_deg = out.angles_deg.mean();
  return out;
}

std::optional<MomentReport> moment_diagnostics(const Dataset& ds) {
  if (!ds.truth) return std::nullopt;
  const GroundTruth& g = *ds.truth;
  const Eigen::Index M = ds.Y.rows();
  const Eigen::Index N = g.A0.cols();
  const double T = static_cast<double>(ds.Y.cols());
  if (ds.Y.cols() < 2) throw InsufficientDataError("moment_diagnostics: need T >= 2");

  const Eigen::VectorXd mean_true = g.A0.rowwise().mean();
  const Eigen::MatrixXd AU = g.A0 * null_one_basis(N);
  const Eigen::MatrixXd cov_true =
      AU * AU.transpose() / static_cast<double>((N + 1) * N) +
      g.sigma * g.sigma * Eigen::MatrixXd::Identity(M, M);

  MomentReport out;
  const Eigen::VectorXd mean_hat = ds.Y.rowwise().mean();
  out.mean_z = (mean_hat - mean_true).array() / (cov_true.diagonal().array() / T).sqrt();

  const Eigen::MatrixXd Yc = ds.Y.colwise() - mean_hat;
  out.cov_z.resize(M, M);
  for (Eigen::Index i = 0; i < M; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const Eigen::ArrayXd prod = Yc.row(i).array() * Yc.row(j).array();
      const double est = prod.mean();
      const double var = (prod - est).square().sum() / (T - 1.0);
      const double z = (est - cov_true(i, j)) / std::sqrt(var / T);
      out.cov_z(i, j) = z;
      out.cov_z(j, i) = z;
    }
  }
  out.max_abs_mean_z = out.mean_z.cwiseAbs().maxCoeff();
  out.max_abs_cov_z = out.cov_z.cwiseAbs().maxCoeff();
  return out;
}

std::string format_metrics_table(const std::vector<std::string>& labels,
                                 const std::vector<double>& mse_values,
                                 const std::vector<double>& sad_values) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-16s %14s %12s\n", "method", "MSE", "SAD(deg)");
  out += line;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::snprintf(line, sizeof line, "%-16s %14.6e %12.4f\n", labels[i].c_str(),
                  i < mse_values.size() ? mse_values[i] : std::nan(""),
                  i < sad_values.size() ? sad_values[i] : std::nan(""));
    out += line;
  }
  return out;
}

}  // namespace prism
