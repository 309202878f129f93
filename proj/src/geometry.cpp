#include "prism/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "prism/errors.hpp"
#include "prism/mathcore.hpp"

namespace prism {

namespace {

void require_full_dimensional(const VertexMatrix& A, const char* fn) {
  if (A.cols() < 2 || A.rows() != A.cols() - 1) {
    throw ShapeError(std::string(fn) + ": requires an (N-1) x N vertex matrix");
  }
}

}  // namespace

SimplexProjection project_to_simplex(const Eigen::Ref<const Eigen::VectorXd>& y,
                                     const VertexMatrix& A) {
  if (A.rows() != y.size()) throw ShapeError("project_to_simplex: A rows differ from y");
  const Eigen::Index N = A.cols();
  if (N < 1) throw ShapeError("project_to_simplex: A has no columns");
  SimplexProjection out;
  out.s = Eigen::VectorXd::Constant(N, 1.0 / static_cast<double>(N));
  if (N == 1) {
    out.dist_sq = (y - A.col(0)).squaredNorm();
    return out;
  }

  std::vector<bool> active(N, false);
  const double kkt_tol = 1e-13 * std::max(1.0, A.colwise().squaredNorm().maxCoeff());
  const int max_iter = 100 + 20 * static_cast<int>(N);
  for (int iter = 0; iter < max_iter; ++iter) {
    out.iterations = iter + 1;
    std::vector<Eigen::Index> free;
    for (Eigen::Index i = 0; i < N; ++i) {
      if (!active[i]) free.push_back(i);
    }
    const Eigen::VectorXd r = A * out.s - y;

    Eigen::VectorXd p = Eigen::VectorXd::Zero(N);
    const auto nf = static_cast<Eigen::Index>(free.size());
    if (nf >= 2) {
      const Eigen::MatrixXd U = null_one_basis(nf);
      Eigen::MatrixXd AF(A.rows(), nf);
      for (Eigen::Index k = 0; k < nf; ++k) AF.col(k) = A.col(free[k]);
      const Eigen::MatrixXd AFU = AF * U;
      const Eigen::VectorXd u = AFU.completeOrthogonalDecomposition().solve(-r);
      const Eigen::VectorXd pf = U * u;
      for (Eigen::Index k = 0; k < nf; ++k) p(free[k]) = pf(k);
    }

    if (p.lpNorm<Eigen::Infinity>() <= 1e-13) {
      // Stationary on the current face; check the multipliers of the active
      // bounds.
      const Eigen::VectorXd g = A.transpose() * r;
      double nu = 0.0;
      for (Eigen::Index i : free) nu += g(i);
      nu /= static_cast<double>(nf);
      Eigen::Index release = -1;
      double worst = -kkt_tol;
      for (Eigen::Index i = 0; i < N; ++i) {
        if (active[i] && g(i) - nu < worst) {
          worst = g(i) - nu;
          release = i;
        }
      }
      if (release < 0) break;
      active[release] = false;
      continue;
    }

    double step = 1.0;
    Eigen::Index blocking = -1;
    for (Eigen::Index i : free) {
      if (p(i) < 0.0) {
        const double ratio = -out.s(i) / p(i);
        if (ratio < step) {
          step = ratio;
          blocking = i;
        }
      }
    }
    out.s += step * p;
    if (blocking >= 0) {
      active[blocking] = true;
      out.s(blocking) = 0.0;
    }
  }
  for (Eigen::Index i = 0; i < N; ++i) {
    if (active[i] || out.s(i) < 0.0) out.s(i) = 0.0;
  }
  out.s /= out.s.sum();
  out.dist_sq = (y - A * out.s).squaredNorm();
  return out;
}

bool in_open_hull(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A) {
  const SimplexProjection proj = project_to_simplex(y, A);
  const double scale = 1.0 + y.squaredNorm();
  return proj.dist_sq <= 1e-20 * scale && proj.s.minCoeff() > 1e-12;
}

double affine_residual_sq(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A) {
  if (A.rows() != y.size()) throw ShapeError("affine_residual_sq: A rows differ from y");
  const Eigen::VectorXd d = y - A.col(A.cols() - 1);
  if (A.cols() == 1) return d.squaredNorm();
  const Eigen::MatrixXd Abar = bar_matrix(A);
  const Eigen::VectorXd coef = Abar.colPivHouseholderQr().solve(d);
  return (d - Abar * coef).squaredNorm();
}

std::optional<double> noiseless_svmin_objective(const VertexMatrix& A, const Eigen::MatrixXd& Y) {
  require_full_dimensional(A, "noiseless_svmin_objective");
  if (Y.rows() != A.rows()) throw ShapeError("noiseless_svmin_objective: Y rows differ");
  const double logvol = log_simplex_volume(A);
  if (!std::isfinite(logvol)) return std::nullopt;
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    if (!in_open_hull(Y.col(t), A)) return std::nullopt;
  }
  return logvol;
}

double edge_smooth_objective(const VertexMatrix& A, const Eigen::MatrixXd& S,
                             const Eigen::MatrixXd& Y, double lambda) {
  require_full_dimensional(A, "edge_smooth_objective");
  if (!(lambda > 0.0)) throw DomainError("edge_smooth_objective: lambda must be positive");
  if (S.rows() != A.cols() || S.cols() != Y.cols() || Y.rows() != A.rows()) {
    throw ShapeError("edge_smooth_objective: shape mismatch");
  }
  const double T = static_cast<double>(Y.cols());
  return log_simplex_volume(A) + (Y - A * S).squaredNorm() / (lambda * T);
}

double edge_smooth_objective(const VertexMatrix& A, const Eigen::MatrixXd& Y, double lambda) {
  require_full_dimensional(A, "edge_smooth_objective");
  Eigen::MatrixXd S(A.cols(), Y.cols());
  for (Eigen::Index t = 0; t < Y.cols(); ++t) S.col(t) = project_to_simplex(Y.col(t), A).s;
  return edge_smooth_objective(A, S, Y, lambda);
}

PolyhedralForm PolyhedralForm::from(Eigen::MatrixXd B, Eigen::VectorXd c) {
  if (B.rows() != B.cols() || c.size() != B.rows()) {
    throw ShapeError("PolyhedralForm: B must be square and c conformant");
  }
  PolyhedralForm P;
  P.bN = -B.rowwise().sum();
  P.cN = -c.sum() - 1.0;
  P.B = std::move(B);
  P.c = std::move(c);
  return P;
}

bool PolyhedralForm::contains(const Eigen::Ref<const Eigen::VectorXd>& y) const {
  for (Eigen::Index i = 0; i < facets(); ++i) {
    if (normal(i).dot(y) < offset(i)) return false;
  }
  return true;
}

PolyhedralForm simplex_to_polyhedron(const VertexMatrix& A) {
  require_full_dimensional(A, "simplex_to_polyhedron");
  const Eigen::MatrixXd Abar = bar_matrix(A);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Abar);
  if (!lu.isInvertible()) throw ModelError("simplex_to_polyhedron: A is affinely dependent");
  const Eigen::MatrixXd inv = lu.inverse();
  return PolyhedralForm::from(inv.transpose(), inv * A.col(A.cols() - 1));
}

VertexMatrix polyhedron_to_simplex(const PolyhedralForm& P) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(P.B);
  if (!lu.isInvertible()) throw ModelError("polyhedron_to_simplex: B is singular");
  const Eigen::Index n = P.dim();
  // Abar = B^{-T}, a_N = Abar c.
  const Eigen::MatrixXd Abar = lu.inverse().transpose();
  VertexMatrix A(n, n + 1);
  A.col(n) = Abar * P.c;
  A.leftCols(n) = Abar.colwise() + A.col(n);
  return A;
}

namespace {

double neg_log_abs_det(const Eigen::MatrixXd& B) {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < B.rows(); ++i) {
    const double d = std::abs(lu.matrixLU()(i, i));
    if (d == 0.0) return std::numeric_limits<double>::infinity();
    acc -= std::log(d);
  }
  return acc;
}

}  // namespace

double sisal_objective(const PolyhedralForm& P, const Eigen::MatrixXd& Y, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("sisal_objective: lambda must be positive");
  if (Y.rows() != P.dim()) throw ShapeError("sisal_objective: Y rows differ from dim");
  const double base = neg_log_abs_det(P.B);
  if (!std::isfinite(base)) return base;
  double hinge = 0.0;
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    for (Eigen::Index i = 0; i < P.facets(); ++i) {
      hinge += std::max(0.0, P.offset(i) - P.normal(i).dot(Y.col(t)));
    }
  }
  return base + hinge / (lambda * static_cast<double>(Y.cols()));
}

double log_normal_cdf(double x) {
  if (std::isnan(x)) return x;
  if (x > 0.0) return std::log1p(-0.5 * std::erfc(x / std::numbers::sqrt2));
  if (x >= -8.0) return std::log(0.5 * std::erfc(-x / std::numbers::sqrt2));
  // Phi(x) = phi(x) R(-x); R(z) = 1/(z + 1/(z + 2/(z + 3/(z + ...)))).
  const double z = -x;
  double tail = z;
  for (int k = 80; k >= 1; --k) tail = z + k / tail;
  return -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(tail);
}

namespace {

double chance_penalty(const PolyhedralForm& P, const Eigen::Ref<const Eigen::VectorXd>& y,
                      double sigma, bool take_max) {
  double best = take_max ? -std::numeric_limits<double>::infinity()
                         : std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < P.facets(); ++i) {
    const Eigen::VectorXd b = P.normal(i);
    const double arg = (b.dot(y) - P.offset(i)) / (sigma * b.norm());
    const double v = log_normal_cdf(arg);
    best = take_max ? std::max(best, -v) : std::min(best, v);
  }
  return best;
}

}  // namespace

double chance_objective(const PolyhedralForm& P, const Eigen::MatrixXd& Y, double sigma) {
  if (!(sigma > 0.0)) throw DomainError("chance_objective: sigma must be positive");
  if (Y.rows() != P.dim()) throw ShapeError("chance_objective: Y rows differ from dim");
  const double base = neg_log_abs_det(P.B);
  if (!std::isfinite(base)) return base;
  double acc = 0.0;
  for (Eigen::Index t = 0; t < Y.cols(); ++t) acc += chance_penalty(P, Y.col(t), sigma, true);
  return base + acc / static_cast<double>(Y.cols());
}

double log_chance_bound_pdf(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                            double sigma) {
  if (!(sigma > 0.0)) throw DomainError("chance_bound_pdf: sigma must be positive");
  const PolyhedralForm P = simplex_to_polyhedron(A);
  if (y.size() != P.dim()) throw ShapeError("chance_bound_pdf: y has wrong length");
  return chance_penalty(P, y, sigma, false) - log_simplex_volume(A);
}

double chance_bound_pdf(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                        double sigma) {
  return std::exp(log_chance_bound_pdf(y, A, sigma));
}

double generalized_edge_smooth(const VertexMatrix& A, const Eigen::MatrixXd& Y, double lambda,
                               double sigma) {
  if (!(lambda > 0.0) || !(sigma > 0.0)) {
    throw DomainError("generalized_edge_smooth: lambda and sigma must be positive");
  }
  if (Y.rows() != A.rows()) throw ShapeError("generalized_edge_smooth: Y rows differ");
  if (!affinely_independent(A)) {
    throw ModelError("generalized_edge_smooth: A is affinely dependent");
  }
  const double T = static_cast<double>(Y.cols());
  double conv = 0.0;
  double aff = 0.0;
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    conv += project_to_simplex(Y.col(t), A).dist_sq;
    aff += affine_residual_sq(Y.col(t), A);
  }
  return log_simplex_volume(A) + conv / (lambda * T) +
         (1.0 / (2.0 * sigma * sigma) - 1.0 / lambda) * aff / T;
}

}  // namespace prism
