#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "prism/errors.hpp"
#include "prism/dimred.hpp"
#include "prism/eval.hpp"
#include "prism/init.hpp"
#include "prism/isa.hpp"
#include "prism/model.hpp"
#include "prism/pipeline.hpp"

using namespace prism;

TEST_CASE("accepted samples lie inside the simplex") {
  std::mt19937_64 gen(1);
  Eigen::MatrixXd A = oracle::random_matrix(4, 5, gen);
  Eigen::VectorXd y = A * oracle::simplex_point(5, gen) + 0.05 * oracle::random_matrix(4, 1, gen);
  auto b = sample_posterior(y, A, 0.05, 2000, 3);
  REQUIRE(b.accepted() > 0);
  CHECK((b.samples.array() > 0).all());
  CHECK(((b.samples.colwise().sum().array() - 1).abs() <= 1e-12).all());
  CHECK(b.proposed == 2000);
}

TEST_CASE("a flat likelihood accepts nearly everything") {
  Eigen::MatrixXd A(2, 3);
  A << 0, 1, 0, 0, 0, 1;
  auto b = sample_posterior(Eigen::Vector2d(0.3, 0.3), A, 1e4, 20000, 5);
  CHECK(b.accepted() >= 19990);
  const Eigen::VectorXd mean = b.samples.rowwise().mean();
  const double se = std::sqrt((1.0 / 3) * (2.0 / 3) / 4 / b.accepted());
  CHECK(((mean.array() - 1.0 / 3).abs() <= 4 * se).all());
}

TEST_CASE("one-dimensional posterior mean matches quadrature") {
  Eigen::MatrixXd A(1, 2);
  A << 0, 1;
  const double sigma = 0.1;
  for (double yv : {0.5, 0.2}) {
    auto w = [&](double s) { return std::exp(-(yv - s) * (yv - s) / (2 * sigma * sigma)); };
    const double Z = oracle::simpson(w, 0.0, 1.0, 4000);
    const double mean = oracle::simpson([&](double s) { return s * w(s); }, 0.0, 1.0, 4000) / Z;
    const double second = oracle::simpson([&](double s) { return s * s * w(s); }, 0.0, 1.0, 4000) / Z;
    auto b = sample_posterior(Eigen::VectorXd::Constant(1, yv), A, sigma, 100000, 7);
    const double est = b.samples.row(1).mean();
    const double se = std::sqrt((second - mean * mean) / b.accepted());
    CHECK(std::abs(est - mean) <= 3 * se);
    // log p(y) against the quadrature integral of phi_sigma(y - s).
    const double logp = std::log(Z / (std::sqrt(2 * std::numbers::pi) * sigma));
    CHECK(b.loglik == doctest::Approx(logp).epsilon(0.01));
  }
}

TEST_CASE("far-away points are almost never accepted") {
  Eigen::MatrixXd A(2, 3);
  A << 0, 1, 0, 0, 0, 1;
  // Beyond a vertex the bound is tight only at that vertex.
  auto b = sample_posterior(Eigen::Vector2d(-3, -3), A, 0.05, 20000, 9);
  CHECK(static_cast<double>(b.accepted()) / b.proposed < 1e-3);
}

TEST_CASE("extra proposal rounds honour min_accepted") {
  Eigen::MatrixXd A(2, 3);
  A << 0, 1, 0, 0, 0, 1;
  Rng rng(3);
  auto b = sample_posterior(Eigen::Vector2d(-0.2, -0.2), A, 0.1, 100, rng, 5, 200);
  CHECK(b.accepted() >= 5);
  CHECK(b.proposed % 100 == 0);
  CHECK_THROWS_AS(sample_posterior(Eigen::Vector2d(0, 0), A, 0.1, 0, 1), DomainError);
}

TEST_CASE("mcem_update closed forms") {
  Eigen::Vector3d xi(0.2, 0.3, 0.5);
  Eigen::MatrixXd Y(2, 1);
  Y << 1.0, -2.0;
  Eigen::MatrixXd A = mcem_update(Y, {Eigen::MatrixXd(xi)});
  Eigen::MatrixXd expect = Y.col(0) * xi.transpose() / xi.squaredNorm();
  CHECK(A.isApprox(expect, 1e-12));

  std::mt19937_64 gen(11);
  Eigen::MatrixXd A0 = oracle::random_matrix(3, 3, gen, 0.0, 1.0);
  Dataset ds = synthesize(A0, 0.0, 50, 12);
  std::vector<Eigen::MatrixXd> exact;
  for (int t = 0; t < 50; ++t) exact.emplace_back(ds.truth->S0.col(t));
  Eigen::MatrixXd Ahat = mcem_update(ds.Y, exact);
  CHECK((Ahat * ds.truth->S0 - ds.Y).norm() <= 1e-10);

  CHECK_THROWS_AS(mcem_update(ds.Y, std::vector<Eigen::MatrixXd>(50, Eigen::MatrixXd(3, 0))),
                  NoUpdateError);
  CHECK_THROWS_AS(mcem_update(ds.Y, {}), ShapeError);
}

TEST_CASE("mcem_update solves the stacked normal equations") {
  std::mt19937_64 gen(13);
  const int M = 3, N = 3, T = 50;
  Eigen::MatrixXd Y = oracle::random_matrix(M, T, gen);
  std::vector<Eigen::MatrixXd> batches;
  // Rows of the least-squares system: each sample r of point t contributes
  // (y_t - A xi_r) with weight 1/R_t; vec(A xi) = (xi^T kron I) vec(A).
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(M * N, M * N);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(M * N);
  for (int t = 0; t < T; ++t) {
    const int R = 1 + t % 4;
    Eigen::MatrixXd b(N, R);
    for (int r = 0; r < R; ++r) b.col(r) = oracle::simplex_point(N, gen);
    batches.push_back(b);
    for (int r = 0; r < R; ++r) {
      Eigen::MatrixXd J = Eigen::MatrixXd::Zero(M, M * N);
      for (int n = 0; n < N; ++n) J.middleCols(n * M, M) = b(n, r) * Eigen::MatrixXd::Identity(M, M);
      K += J.transpose() * J / R;
      rhs += J.transpose() * Y.col(t) / R;
    }
  }
  Eigen::VectorXd vecA = K.ldlt().solve(rhs);
  Eigen::MatrixXd ref = Eigen::Map<Eigen::MatrixXd>(vecA.data(), M, N);
  CHECK((mcem_update(Y, batches) - ref).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("mcem_update is permutation equivariant") {
  std::mt19937_64 gen(15);
  Eigen::MatrixXd Y = oracle::random_matrix(4, 30, gen);
  std::vector<Eigen::MatrixXd> batches, permuted;
  Eigen::PermutationMatrix<4> P;
  P.indices() << 3, 1, 0, 2;
  for (int t = 0; t < 30; ++t) {
    Eigen::MatrixXd b(4, 3);
    for (int r = 0; r < 3; ++r) b.col(r) = oracle::simplex_point(4, gen);
    batches.push_back(b);
    permuted.push_back(P.transpose() * b);
  }
  CHECK((mcem_update(Y, permuted) - mcem_update(Y, batches) * P).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("starting at the truth with small noise stays there") {
  std::mt19937_64 gen(17);
  Eigen::MatrixXd A0 = oracle::random_matrix(2, 3, gen, 0.0, 1.0);
  const double sigma = 0.005;
  Dataset ds = synthesize(A0, sigma, 400, 18);
  IsaConfig cfg;
  cfg.max_iters = 10;
  cfg.proposals_per_point = 300;
  cfg.seed = 19;
  auto rep = isa_prism(ds.Y, cfg, A0, sigma, [&](const VertexMatrix& A) { return mse(A0, A).value; });
  REQUIRE(rep.mse.size() == static_cast<std::size_t>(rep.iterations));
  for (double m : rep.mse) CHECK(m <= 1e-4);
  CHECK(rep.acceptance_rate.size() == rep.loglik.size());
}

TEST_CASE("Monte Carlo log-likelihood ascends across seeds") {
  int up = 0;
  const int trials = 50;
  for (int k = 0; k < trials; ++k) {
    VertexMatrix A0 = random_vertices(3, 3, derive_seed(500, k));
    const double sigma = snr_to_sigma(A0, 15.0);
    Dataset ds = synthesize(A0, sigma, 200, derive_seed(501, k));
    auto init = pure_pixel_init(ds.Y, 3);
    IsaConfig cfg;
    cfg.max_iters = 8;
    cfg.proposals_per_point = 200;
    cfg.rel_tol = 1e-12;
    cfg.seed = derive_seed(502, k);
    auto rep = isa_prism(ds.Y, cfg, init.A, sigma);
    // loglik[i] is evaluated at the iterate entering iteration i.
    if (rep.loglik.back() > rep.loglik.front()) ++up;
  }
  // One-sided sign test at 5%: P(X >= 32) < 0.05 for X ~ Bin(50, 1/2).
  CHECK(up >= 32);
}

TEST_CASE("acceptance collapses at N = 20") {
  VertexMatrix A0 = random_vertices(19, 20, 23);
  const double sigma = snr_to_sigma(A0, 20.0);
  Dataset ds = synthesize(A0, sigma, 200, 24);
  auto init = pure_pixel_init(ds.Y, 20);
  IsaConfig cfg;
  cfg.max_iters = 3;
  cfg.seed = 25;
  auto rep = isa_prism(ds.Y, cfg, init.A, sigma);
  CHECK(rep.acceptance_collapse);
  CHECK_FALSE(rep.warnings.empty());
}

TEST_CASE("config validation") {
  IsaConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  CHECK(cfg.proposals_per_point == 500);
  CHECK(cfg.max_iters == 100);
  CHECK(cfg.min_accepted == 0);
  cfg.proposals_per_point = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
