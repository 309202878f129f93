#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/mathcore.hpp"

using namespace prism;

TEST_CASE("log_gamma known values") {
  CHECK(std::abs(log_gamma(1.0)) <= 1e-14);
  CHECK(std::abs(log_gamma(5.0) - std::log(24.0)) < 1e-12 * std::log(24.0));
  CHECK(std::abs(log_gamma(0.5) - 0.5 * std::log(std::numbers::pi)) < 1e-12);
  CHECK(std::abs(log_gamma(0.5) - 0.5723649429247001) < 1e-12);
}

TEST_CASE("log_gamma matches std::lgamma and the recurrence") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(1e-3, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = u(gen);
    CHECK(std::abs(log_gamma(x + 1) - log_gamma(x) - std::log(x)) <= 1e-10);
    CHECK(std::abs(log_gamma(x) - std::lgamma(x)) <= 1e-12 * std::max(1.0, std::abs(std::lgamma(x))));
  }
}

TEST_CASE("digamma against the series oracle") {
  CHECK(std::abs(digamma(1.0) + 0.5772156649015329) < 1e-12);
  CHECK(std::abs(digamma(2.0) - digamma(1.0) - 1.0) < 1e-12);
  for (double x : {0.01, 0.1, 0.5, 1.0, 3.3, 10.5, 42.0, 1e3}) {
    CHECK(std::abs(digamma(x) - oracle::digamma(x)) < 1e-10);
  }
}

TEST_CASE("trigamma and tetragamma against the series oracle") {
  const double pi2_6 = std::numbers::pi * std::numbers::pi / 6;
  CHECK(std::abs(trigamma(1.0) - pi2_6) < 1e-12);
  CHECK(std::abs(trigamma(2.0) - (trigamma(1.0) - 1.0)) < 1e-12);
  for (double x : {0.05, 0.25, 1.0, 2.7, 9.99, 10.0, 55.0}) {
    CHECK(std::abs(trigamma(x) - oracle::trigamma(x)) < 1e-10 * std::max(1.0, trigamma(x)));
    CHECK(std::abs(tetragamma(x) - oracle::tetragamma(x)) <
          1e-10 * std::max(1.0, std::abs(tetragamma(x))));
  }
}

TEST_CASE("special functions agree with finite differences") {
  const double h = 1e-5;
  for (double x = 0.1; x <= 20.0; x += 0.37) {
    const double d_lg = (log_gamma(x + h) - log_gamma(x - h)) / (2 * h);
    const double d_psi = (digamma(x + h) - digamma(x - h)) / (2 * h);
    CHECK(std::abs(digamma(x) - d_lg) < 1e-6);
    CHECK(std::abs(trigamma(x) - d_psi) < 1e-6 * std::max(1.0, trigamma(x)));
  }
}

TEST_CASE("special functions reject non-positive arguments") {
  CHECK_THROWS_AS(log_gamma(0.0), DomainError);
  CHECK_THROWS_AS(digamma(-1.0), DomainError);
  CHECK_THROWS_AS(trigamma(std::nan("")), DomainError);
  CHECK_THROWS_AS(tetragamma(-0.5), DomainError);
  CHECK_THROWS_AS(log_gamma(std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("bar_matrix") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 0, 0, 0, 1, 0;
  CHECK(bar_matrix(A).isApprox(Eigen::MatrixXd::Identity(2, 2)));
  Eigen::MatrixXd same = Eigen::VectorXd::LinSpaced(3, 1, 3).replicate(1, 4);
  CHECK(bar_matrix(same).norm() == 0.0);
  std::mt19937_64 gen(3);
  Eigen::MatrixXd R = oracle::random_matrix(3, 4, gen);
  Eigen::MatrixXd Rb = bar_matrix(R);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < 3; ++i) CHECK(Rb(i, j) == R(i, j) - R(i, 3));
  }
  CHECK_THROWS_AS(bar_matrix(Eigen::MatrixXd::Ones(3, 1)), ShapeError);
}

TEST_CASE("simplex_volume") {
  Eigen::MatrixXd A(2, 3);
  A << 1, 0, 0, 0, 1, 0;
  CHECK(simplex_volume(A) == doctest::Approx(0.5).epsilon(1e-14));
  Eigen::MatrixXd D(3, 3);
  D << 1, 2, 1, 0, 3, 0, 5, 1, 5;
  CHECK(simplex_volume(D) == 0.0);
  CHECK_FALSE(affinely_independent(D));
  CHECK_THROWS_AS(simplex_volume(Eigen::MatrixXd::Ones(1, 3)), ShapeError);

  std::mt19937_64 gen(5);
  for (int k = 0; k < 20; ++k) {
    Eigen::MatrixXd T = oracle::random_matrix(2, 3, gen);
    CHECK(simplex_volume(T) == doctest::Approx(oracle::shoelace(T)).epsilon(1e-12));
  }
}

TEST_CASE("simplex_volume is invariant to permutation, translation and isometric lifting") {
  std::mt19937_64 gen(8);
  for (int k = 0; k < 20; ++k) {
    const int N = 2 + k % 6;
    Eigen::MatrixXd B = oracle::random_matrix(N - 1, N, gen);
    const double v = simplex_volume(B);
    Eigen::PermutationMatrix<Eigen::Dynamic> P(N);
    P.setIdentity();
    std::shuffle(P.indices().data(), P.indices().data() + N, gen);
    CHECK(simplex_volume(Eigen::MatrixXd(B * P)) == doctest::Approx(v).epsilon(1e-10));
    Eigen::VectorXd d = oracle::random_matrix(N - 1, 1, gen);
    CHECK(simplex_volume(Eigen::MatrixXd(B.colwise() + d)) == doctest::Approx(v).epsilon(1e-10));
    const int M = N + 4;
    Eigen::MatrixXd Q = oracle::random_matrix(M, N - 1, gen).householderQr().householderQ() *
                        Eigen::MatrixXd::Identity(M, N - 1);
    Eigen::VectorXd shift = oracle::random_matrix(M, 1, gen);
    Eigen::MatrixXd lifted = (Q * B).colwise() + shift;
    CHECK(simplex_volume(lifted) == doctest::Approx(v).epsilon(1e-10));
  }
}

TEST_CASE("log_simplex_volume stays finite where factorials overflow") {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(200, 201);
  A.leftCols(200).setIdentity();
  CHECK(log_simplex_volume(A) == doctest::Approx(-std::lgamma(201.0)).epsilon(1e-12));
}

TEST_CASE("null_one_basis") {
  Eigen::MatrixXd U2 = null_one_basis(2);
  CHECK(std::abs(std::abs(U2(0, 0)) - 1 / std::sqrt(2.0)) < 1e-15);
  CHECK(std::abs(U2(0, 0) + U2(1, 0)) < 1e-15);
  for (int n = 2; n <= 30; ++n) {
    Eigen::MatrixXd U = null_one_basis(n);
    CHECK((U.transpose() * U - Eigen::MatrixXd::Identity(n - 1, n - 1)).norm() <= 1e-12);
    CHECK((U.transpose() * Eigen::VectorXd::Ones(n)).norm() <= 1e-12);
    Eigen::MatrixXd C = Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
    CHECK((U * U.transpose() - C).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(U == null_one_basis(n));
  }
  CHECK_THROWS_AS(null_one_basis(1), ShapeError);
}

TEST_CASE("pseudo_inverse") {
  CHECK(pseudo_inverse(Eigen::MatrixXd::Identity(4, 4)).isApprox(Eigen::MatrixXd::Identity(4, 4)));
  Eigen::MatrixXd Z = pseudo_inverse(Eigen::MatrixXd::Zero(3, 5));
  CHECK(Z.rows() == 5);
  CHECK(Z.cols() == 3);
  CHECK(Z.norm() == 0.0);

  std::mt19937_64 gen(21);
  Eigen::MatrixXd X = oracle::random_matrix(6, 6, gen);
  CHECK((X * pseudo_inverse(X) - Eigen::MatrixXd::Identity(6, 6)).norm() <= 1e-10);
  CHECK(pseudo_inverse(X).isApprox(X.partialPivLu().inverse(), 1e-10));

  for (int k = 0; k < 50; ++k) {
    const int r = 1 + k % 5;
    Eigen::MatrixXd L = oracle::random_matrix(7, r, gen);
    Eigen::MatrixXd R = oracle::random_matrix(r, 4 + k % 3, gen);
    Eigen::MatrixXd A = L * R;
    Eigen::MatrixXd P = pseudo_inverse(A);
    CHECK((A * P * A - A).norm() <= 1e-8);
    CHECK((P * A * P - P).norm() <= 1e-8);
    CHECK(((A * P).transpose() - A * P).norm() <= 1e-8);
    CHECK(((P * A).transpose() - P * A).norm() <= 1e-8);
  }
  Eigen::MatrixXd bad = Eigen::MatrixXd::Ones(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(pseudo_inverse(bad), DomainError);
}

TEST_CASE("tolerances validate") {
  Tolerances t;
  CHECK_NOTHROW(t.validate());
  t.pinv_cutoff = 1.0;
  CHECK_THROWS(t.validate());
  t = Tolerances{};
  t.abs_eps = 0.0;
  CHECK_THROWS(t.validate());
}
