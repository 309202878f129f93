#pragma once

// Special functions and simplex linear-algebra primitives.
//
// The special functions use the classical recipe: shift the argument upward
// with the recurrence until x >= 10, then evaluate the asymptotic (Stirling /
// Bernoulli) series. Ten terms of the series at x >= 10 are below double
// precision round-off.

#include <Eigen/Dense>

#include <cmath>
#include <concepts>
#include <numbers>
#include <string>

#include "prism/errors.hpp"

namespace prism {

struct Tolerances {
  double rel_eps = 1e-10;
  double abs_eps = 1e-12;
  // Singular values below pinv_cutoff * sigma_max are treated as zero.
  double pinv_cutoff = 1e-12;

  void validate() const;
};

namespace detail {

template <std::floating_point T>
void require_positive(T x, const char* fn) {
  if (!(x > T(0)) || !std::isfinite(x)) {
    throw DomainError(std::string(fn) + ": argument must be positive and finite, got " +
                      std::to_string(static_cast<double>(x)));
  }
}

inline constexpr double kShift = 10.0;

}  // namespace detail

template <std::floating_point T>
T log_gamma(T x) {
  detail::require_positive(x, "log_gamma");
  T prod = T(1);
  while (x < T(detail::kShift)) {
    prod *= x;
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  // Bernoulli terms B_2k / (2k (2k-1) x^(2k-1)).
  const T series =
      inv * (T(1) / 12 +
             inv2 * (T(-1) / 360 +
                     inv2 * (T(1) / 1260 +
                             inv2 * (T(-1) / 1680 +
                                     inv2 * (T(1) / 1188 +
                                             inv2 * (T(-691) / 360360 + inv2 * (T(1) / 156)))))));
  const T stirling = (x - T(0.5)) * std::log(x) - x +
                     T(0.5) * std::log(T(2) * std::numbers::pi_v<T>) + series;
  return stirling - std::log(prod);
}

template <std::floating_point T>
T digamma(T x) {
  detail::require_positive(x, "digamma");
  T acc = T(0);
  while (x < T(detail::kShift)) {
    acc -= T(1) / x;
    x += T(1);
  }
  const T inv2 = T(1) / (x * x);
  const T series =
      inv2 * (T(1) / 12 +
              inv2 * (T(-1) / 120 +
                      inv2 * (T(1) / 252 +
                              inv2 * (T(-1) / 240 +
                                      inv2 * (T(1) / 132 +
                                              inv2 * (T(-691) / 32760 + inv2 * (T(1) / 12)))))));
  return acc + std::log(x) - T(0.5) / x - series;
}

template <std::floating_point T>
T trigamma(T x) {
  detail::require_positive(x, "trigamma");
  T acc = T(0);
  while (x < T(detail::kShift)) {
    acc += T(1) / (x * x);
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  const T series =
      inv * (T(1) +
             inv * (T(0.5) +
                    inv * (T(1) / 6 +
                           inv2 * (T(-1) / 30 +
                                   inv2 * (T(1) / 42 +
                                           inv2 * (T(-1) / 30 +
                                                   inv2 * (T(5) / 66 +
                                                           inv2 * (T(-691) / 2730 +
                                                                   inv2 * (T(7) / 6)))))))));
  return acc + series;
}

// psi''(x); used by the safeguarded Newton steps of the variational solver.
template <std::floating_point T>
T tetragamma(T x) {
  detail::require_positive(x, "tetragamma");
  T acc = T(0);
  while (x < T(detail::kShift)) {
    acc -= T(2) / (x * x * x);
    x += T(1);
  }
  const T inv = T(1) / x;
  const T inv2 = inv * inv;
  const T series =
      -inv2 * (T(1) +
               inv * (T(1) +
                      inv * (T(0.5) +
                             inv2 * (T(-1) / 6 +
                                     inv2 * (T(1) / 6 +
                                             inv2 * (T(-3) / 10 +
                                                     inv2 * (T(5) / 6 +
                                                             inv2 * (T(-691) / 210))))))));
  return acc + series;
}

template <std::floating_point T>
T log_factorial(int n) {
  if (n < 0) throw DomainError("log_factorial: negative argument");
  return n < 2 ? T(0) : log_gamma(T(n + 1));
}

// Columns a_i - a_N, i = 1..N-1.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> bar_matrix(
    const Eigen::MatrixBase<Derived>& A) {
  if (A.cols() < 2) throw ShapeError("bar_matrix: need at least two columns");
  using Mat = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Mat out = A.leftCols(A.cols() - 1);
  out.colwise() -= A.col(A.cols() - 1);
  return out;
}

// log svol(A) = 0.5 log det(Abar^T Abar) - log (N-1)!; -inf when A is affinely
// dependent. The determinant comes from the R factor of a pivoted QR of Abar.
template <typename Derived>
typename Derived::Scalar log_simplex_volume(const Eigen::MatrixBase<Derived>& A) {
  using Scalar = typename Derived::Scalar;
  if (A.cols() < 2) throw ShapeError("simplex_volume: need at least two columns");
  if (A.rows() < A.cols() - 1) {
    throw ShapeError("simplex_volume: need M >= N-1");
  }
  const auto Abar = bar_matrix(A);
  Eigen::ColPivHouseholderQR<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> qr(Abar);
  if (qr.rank() < Abar.cols()) return -std::numeric_limits<Scalar>::infinity();
  Scalar logdet = Scalar(0);
  for (Eigen::Index i = 0; i < Abar.cols(); ++i) {
    logdet += std::log(std::abs(qr.matrixQR()(i, i)));
  }
  return logdet - log_factorial<Scalar>(static_cast<int>(A.cols() - 1));
}

template <typename Derived>
typename Derived::Scalar simplex_volume(const Eigen::MatrixBase<Derived>& A) {
  return std::exp(log_simplex_volume(A));
}

// Affine independence: rank(Abar) = N - 1.
template <typename Derived>
bool affinely_independent(const Eigen::MatrixBase<Derived>& A) {
  if (A.cols() < 2) return A.cols() == 1;
  if (A.rows() < A.cols() - 1) return false;
  Eigen::ColPivHouseholderQR<
      Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
      qr(bar_matrix(A));
  return qr.rank() == A.cols() - 1;
}

// Semi-orthogonal U (n x (n-1)) with U^T 1 = 0: the first n-1 columns of the
// Householder reflector that carries 1/sqrt(n) onto e_n.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> null_one_basis(Eigen::Index n) {
  if (n < 2) throw ShapeError("null_one_basis: n must be at least 2");
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Vec v = Vec::Constant(n, Scalar(1) / std::sqrt(Scalar(n)));
  v(n - 1) -= Scalar(1);
  const Scalar scale = Scalar(2) / v.squaredNorm();
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> U = -scale * v * v.head(n - 1).transpose();
  U.topRows(n - 1).diagonal().array() += Scalar(1);
  return U;
}

Eigen::MatrixXd pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Tolerances& tol = {});

}  // namespace prism
