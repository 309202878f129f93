#pragma once

// Generative model: y_t = A0 s_t + v_t with s_t uniform on the open unit
// simplex and v_t ~ N(0, sigma^2 I).

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

#include "prism/rng.hpp"

namespace prism {

// Columns are simplex vertices (M x N).
using VertexMatrix = Eigen::MatrixXd;

class DirichletParam {
 public:
  DirichletParam() = default;
  explicit DirichletParam(Eigen::VectorXd alpha);
  static DirichletParam uniform(Eigen::Index n) {
    return DirichletParam(Eigen::VectorXd::Ones(n));
  }

  const Eigen::VectorXd& alpha() const { return alpha_; }
  Eigen::Index size() const { return alpha_.size(); }
  double concentration() const { return alpha_.sum(); }

 private:
  Eigen::VectorXd alpha_;
};

struct DirichletMoments {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
  double entropy = 0.0;
};

DirichletMoments dirichlet_moments(const DirichletParam& alpha);

// log D(s; alpha); -inf outside the open simplex.
double dirichlet_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& s, const DirichletParam& alpha);

// log B(alpha) = sum log Gamma(alpha_i) - log Gamma(sum alpha_i).
double log_multivariate_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha);

Eigen::VectorXd sample_uniform_simplex(Rng& rng, Eigen::Index n);
Eigen::VectorXd sample_dirichlet(const DirichletParam& alpha, Rng& rng);
// N x count matrix of i.i.d. draws; column j uses its own stream of `seed`.
Eigen::MatrixXd sample_dirichlet(const DirichletParam& alpha, Eigen::Index count,
                                 std::uint64_t seed);

struct GroundTruth {
  VertexMatrix A0;
  Eigen::MatrixXd S0;  // N x T, columns in the open unit simplex
  double sigma = 0.0;
};

struct DatasetMeta {
  std::optional<std::uint64_t> seed;
  std::optional<double> snr_db;
  std::string snr_convention;
};

struct Dataset {
  Eigen::MatrixXd Y;  // M x T, one observation per column
  std::optional<GroundTruth> truth;
  DatasetMeta meta;

  Eigen::Index dim() const { return Y.rows(); }
  Eigen::Index size() const { return Y.cols(); }
  void validate() const;
};

// Throws ModelError when A0 is affinely dependent. sigma = 0 gives noiseless
// data.
Dataset synthesize(const VertexMatrix& A0, double sigma, Eigen::Index T, std::uint64_t seed);

// Monte Carlo estimate of log p(y; A) = log E_s[phi_sigma(y - A s)], s uniform
// on the simplex. The mean over uniform draws already carries the (N-1)! of
// the simplex-coordinate integral.
double loglik_mc(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                 double sigma, Eigen::Index R, std::uint64_t seed);

// Same estimator over caller-supplied simplex samples (N x R).
double loglik_from_samples(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                           double sigma, const Eigen::Ref<const Eigen::MatrixXd>& samples);

// Per-sample log(phi_sigma(y - A s)) terms and their log-mean-exp; shared by
// the likelihood estimator and the sampler diagnostics.
double log_mean_gaussian(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                         double sigma, const Eigen::Ref<const Eigen::MatrixXd>& samples);

// Density of x = B s, s uniform: 1/svol(B) inside the open hull, else 0.
double uniform_simplex_pdf(const Eigen::Ref<const Eigen::VectorXd>& x, const VertexMatrix& B);

// E||A0 s||^2 for s uniform on the simplex.
double mean_signal_energy(const VertexMatrix& A0);

inline constexpr const char* kSnrConvention =
    "snr_db = 10 log10(E||A0 s||^2 / (M sigma^2)), s uniform on the simplex";

double snr_to_sigma(const VertexMatrix& A0, double snr_db);

}  // namespace prism
