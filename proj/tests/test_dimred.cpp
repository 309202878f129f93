#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/dimred.hpp"
#include "prism/geometry.hpp"
#include "prism/mathcore.hpp"
#include "prism/model.hpp"

using namespace prism;

TEST_CASE("reduce is an exact recoordinatisation when M = N - 1") {
  std::mt19937_64 gen(1);
  Eigen::MatrixXd A0 = oracle::random_matrix(3, 4, gen);
  Dataset ds = synthesize(A0, 0.0, 200, 2);
  Reduction r = reduce(ds.Y, 4);
  CHECK_NOTHROW(r.chart.validate());
  CHECK((lift(r.Z, r.chart) - ds.Y).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(r.residual_energy <= 1e-20);
}

TEST_CASE("noiseless data in high dimension reconstruct exactly") {
  std::mt19937_64 gen(3);
  Eigen::MatrixXd A0 = oracle::random_matrix(40, 5, gen, 0.0, 1.0);
  Dataset ds = synthesize(A0, 0.0, 300, 4);
  Reduction r = reduce(ds.Y, 5);
  CHECK((lift(r.Z, r.chart) - ds.Y).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(project(ds.Y, r.chart).isApprox(r.Z));

  // Vertices expressed in the chart lift back to A0.
  const Eigen::MatrixXd B0 = project(A0, r.chart);
  CHECK((lift(B0, r.chart) - A0).cwiseAbs().maxCoeff() <= 1e-8);
  CHECK(simplex_volume(B0) == doctest::Approx(simplex_volume(A0)).epsilon(1e-8));

  // Membership is preserved by the round trip.
  for (int t = 0; t < 50; ++t) {
    CHECK(project_to_simplex(r.Z.col(t), B0).dist_sq <= 1e-18);
  }
}

TEST_CASE("residual energy of isotropic noise") {
  std::mt19937_64 gen(5);
  const int M = 20, N = 4;
  Eigen::MatrixXd A0 = oracle::random_matrix(M, N, gen, 0.0, 1.0);
  const double sigma = 0.01;
  Dataset ds = synthesize(A0, sigma, 10000, 6);
  Reduction r = reduce(ds.Y, N);
  const double expected = (M - N + 1) * sigma * sigma;
  CHECK(std::abs(r.residual_energy - expected) <= 0.1 * expected);
}

TEST_CASE("Gram path agrees with the covariance path") {
  std::mt19937_64 gen(7);
  Eigen::MatrixXd A0 = oracle::random_matrix(2100, 3, gen, 0.0, 1.0);
  Dataset ds = synthesize(A0, 1e-3, 60, 8);
  Reduction big = reduce(ds.Y, 3);
  CHECK_NOTHROW(big.chart.validate());
  Eigen::MatrixXd Yc = ds.Y.colwise() - ds.Y.rowwise().mean();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Yc, Eigen::ComputeThinU);
  Eigen::MatrixXd Qref = svd.matrixU().leftCols(2);
  // Same subspace: projector difference vanishes.
  CHECK((big.chart.Q * big.chart.Q.transpose() - Qref * Qref.transpose()).norm() <= 1e-8);
}

TEST_CASE("reduce is invariant to permuting observations up to column signs") {
  std::mt19937_64 gen(9);
  Eigen::MatrixXd Y = oracle::random_matrix(6, 80, gen);
  Eigen::PermutationMatrix<Eigen::Dynamic> P(80);
  P.setIdentity();
  std::shuffle(P.indices().data(), P.indices().data() + 80, gen);
  Reduction a = reduce(Y, 4);
  Reduction b = reduce(Y * P, 4);
  for (int j = 0; j < 3; ++j) {
    CHECK(std::abs(std::abs(a.chart.Q.col(j).dot(b.chart.Q.col(j))) - 1.0) <= 1e-10);
  }
  CHECK(a.chart.Q.isApprox(b.chart.Q, 1e-10));
}

TEST_CASE("reduce and lift errors") {
  CHECK_THROWS_AS(reduce(Eigen::MatrixXd::Ones(5, 3), 4), InsufficientDataError);
  CHECK_THROWS_AS(reduce(Eigen::MatrixXd::Ones(2, 30), 4), ShapeError);
  AffineChart chart{Eigen::MatrixXd::Identity(4, 2), Eigen::VectorXd::Constant(4, 0.5)};
  CHECK_THROWS_AS(lift(Eigen::MatrixXd::Zero(3, 3), chart), ShapeError);
  Eigen::MatrixXd L = lift(Eigen::MatrixXd::Zero(2, 3), chart);
  CHECK(L.isApprox(Eigen::MatrixXd::Constant(4, 3, 0.5)));
}
