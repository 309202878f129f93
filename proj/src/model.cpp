#include "prism/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "prism/errors.hpp"
#include "prism/mathcore.hpp"

namespace prism {

DirichletParam::DirichletParam(Eigen::VectorXd alpha) : alpha_(std::move(alpha)) {
  if (alpha_.size() < 1) throw DomainError("DirichletParam: empty concentration vector");
  if (!alpha_.allFinite() || (alpha_.array() <= 0.0).any()) {
    throw DomainError("DirichletParam: every component must be positive and finite");
  }
}

double log_multivariate_beta(const Eigen::Ref<const Eigen::VectorXd>& alpha) {
  double acc = 0.0;
  for (double a : alpha) acc += log_gamma(a);
  return acc - log_gamma(alpha.sum());
}

DirichletMoments dirichlet_moments(const DirichletParam& param) {
  const Eigen::VectorXd& alpha = param.alpha();
  const double a0 = alpha.sum();
  DirichletMoments out;
  out.mean = alpha / a0;
  out.cov = Eigen::MatrixXd(out.mean.asDiagonal()) - out.mean * out.mean.transpose();
  out.cov /= (1.0 + a0);
  const double psi0 = digamma(a0);
  double acc = log_multivariate_beta(alpha);
  for (double a : alpha) acc -= (a - 1.0) * (digamma(a) - psi0);
  out.entropy = acc;
  return out;
}

double dirichlet_log_pdf(const Eigen::Ref<const Eigen::VectorXd>& s, const DirichletParam& param) {
  const Eigen::VectorXd& alpha = param.alpha();
  if (s.size() != alpha.size()) throw ShapeError("dirichlet_log_pdf: size mismatch");
  if ((s.array() <= 0.0).any()) return -std::numeric_limits<double>::infinity();
  double acc = -log_multivariate_beta(alpha);
  for (Eigen::Index i = 0; i < s.size(); ++i) acc += (alpha(i) - 1.0) * std::log(s(i));
  return acc;
}

Eigen::VectorXd sample_uniform_simplex(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd s(n);
  for (Eigen::Index i = 0; i < n; ++i) s(i) = -std::log(rng.uniform());
  return s / s.sum();
}

Eigen::VectorXd sample_dirichlet(const DirichletParam& param, Rng& rng) {
  const Eigen::VectorXd& alpha = param.alpha();
  const Eigen::Index n = alpha.size();
  // Gamma variates in log space; shape < 1 uses G(a) = G(a+1) U^(1/a) so tiny
  // shapes cannot underflow to an exact zero.
  Eigen::VectorXd logg(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double a = alpha(i);
    if (a < 1.0) {
      std::gamma_distribution<double> gamma(a + 1.0, 1.0);
      logg(i) = std::log(gamma(rng)) + std::log(rng.uniform()) / a;
    } else {
      std::gamma_distribution<double> gamma(a, 1.0);
      logg(i) = std::log(gamma(rng));
    }
  }
  Eigen::VectorXd s = (logg.array() - logg.maxCoeff()).exp();
  return s / s.sum();
}

Eigen::MatrixXd sample_dirichlet(const DirichletParam& alpha, Eigen::Index count,
                                 std::uint64_t seed) {
  if (count < 1) throw DomainError("sample_dirichlet: count must be at least 1");
  Eigen::MatrixXd out(alpha.size(), count);
  for (Eigen::Index j = 0; j < count; ++j) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(j));
    out.col(j) = sample_dirichlet(alpha, rng);
  }
  return out;
}

void Dataset::validate() const {
  if (Y.cols() < 1) throw ShapeError("Dataset: need at least one observation");
  if (!Y.allFinite()) throw DomainError("Dataset: non-finite observations");
  if (!truth) return;
  const GroundTruth& g = *truth;
  if (g.A0.rows() != Y.rows()) throw ShapeError("Dataset: A0 rows differ from M");
  if (g.S0.rows() != g.A0.cols() || g.S0.cols() != Y.cols()) {
    throw ShapeError("Dataset: S0 must be N x T");
  }
  if (!(g.sigma >= 0.0)) throw DomainError("Dataset: sigma must be non-negative");
  if ((g.S0.array() <= 0.0).any()) throw ModelError("Dataset: S0 entries must be positive");
  const Eigen::VectorXd sums = g.S0.colwise().sum().transpose();
  if (((sums.array() - 1.0).abs() > 1e-9).any()) {
    throw ModelError("Dataset: S0 columns must sum to one");
  }
}

Dataset synthesize(const VertexMatrix& A0, double sigma, Eigen::Index T, std::uint64_t seed) {
  if (T < 1) throw DomainError("synthesize: T must be at least 1");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw DomainError("synthesize: sigma must be non-negative and finite");
  }
  if (!affinely_independent(A0)) throw ModelError("synthesize: A0 is affinely dependent");
  const Eigen::Index M = A0.rows();
  const Eigen::Index N = A0.cols();
  Dataset ds;
  GroundTruth truth{A0, Eigen::MatrixXd(N, T), sigma};
  ds.Y.resize(M, T);
  for (Eigen::Index t = 0; t < T; ++t) {
    Rng rng = Rng::stream(seed, static_cast<std::uint64_t>(t));
    truth.S0.col(t) = sample_uniform_simplex(rng, N);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::VectorXd v(M);
    for (Eigen::Index i = 0; i < M; ++i) v(i) = noise(rng);
    ds.Y.col(t) = A0 * truth.S0.col(t) + sigma * v;
  }
  ds.truth = std::move(truth);
  ds.meta.seed = seed;
  return ds;
}

double log_mean_gaussian(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                         double sigma, const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  if (!(sigma > 0.0)) throw DomainError("log_mean_gaussian: sigma must be positive");
  if (A.rows() != y.size() || A.cols() != samples.rows()) {
    throw ShapeError("log_mean_gaussian: shape mismatch");
  }
  const Eigen::Index R = samples.cols();
  if (R < 1) throw DomainError("log_mean_gaussian: need at least one sample");
  const Eigen::VectorXd expo =
      -((A * samples).colwise() - y).colwise().squaredNorm().transpose() / (2.0 * sigma * sigma);
  const double peak = expo.maxCoeff();
  const double lme = peak + std::log((expo.array() - peak).exp().sum() / static_cast<double>(R));
  const double M = static_cast<double>(y.size());
  return lme - M * (0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma));
}

double loglik_from_samples(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                           double sigma, const Eigen::Ref<const Eigen::MatrixXd>& samples) {
  return log_mean_gaussian(A, y, sigma, samples);
}

double loglik_mc(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                 double sigma, Eigen::Index R, std::uint64_t seed) {
  if (R < 1) throw DomainError("loglik_mc: R must be at least 1");
  Eigen::MatrixXd samples(A.cols(), R);
  Rng rng(seed);
  for (Eigen::Index r = 0; r < R; ++r) samples.col(r) = sample_uniform_simplex(rng, A.cols());
  return loglik_from_samples(A, y, sigma, samples);
}

double uniform_simplex_pdf(const Eigen::Ref<const Eigen::VectorXd>& x, const VertexMatrix& B) {
  if (B.rows() != B.cols() - 1 || x.size() != B.rows()) {
    throw ShapeError("uniform_simplex_pdf: need B of shape (N-1) x N and x of length N-1");
  }
  const Eigen::MatrixXd Bbar = bar_matrix(B);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(Bbar);
  if (!lu.isInvertible()) throw ModelError("uniform_simplex_pdf: B is affinely dependent");
  // Barycentric coordinates: x = b_N + Bbar sbar, s_N = 1 - 1^T sbar.
  const Eigen::VectorXd sbar = lu.solve(x - B.col(B.cols() - 1));
  const double last = 1.0 - sbar.sum();
  if ((sbar.array() <= 0.0).any() || last <= 0.0) return 0.0;
  return std::exp(-log_simplex_volume(B));
}

double mean_signal_energy(const VertexMatrix& A0) {
  const double N = static_cast<double>(A0.cols());
  // E[s s^T] = (I + 1 1^T) / (N (N + 1)) for s uniform on the simplex.
  const Eigen::MatrixXd G = A0.transpose() * A0;
  return (G.trace() + G.sum()) / (N * (N + 1.0));
}

double snr_to_sigma(const VertexMatrix& A0, double snr_db) {
  if (!std::isfinite(snr_db)) throw DomainError("snr_to_sigma: snr_db must be finite");
  const double M = static_cast<double>(A0.rows());
  return std::sqrt(mean_signal_energy(A0) / (M * std::pow(10.0, snr_db / 10.0)));
}

}  // namespace prism
