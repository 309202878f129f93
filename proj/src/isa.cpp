#include "prism/isa.hpp"

#include <chrono>
#include <cmath>
#include <numbers>

#include "prism/errors.hpp"
#include "prism/mathcore.hpp"
#include "prism/parallel.hpp"

namespace prism {

void IsaConfig::validate() const {
  if (proposals_per_point < 1) throw ConfigError("isa: proposals_per_point must be >= 1");
  if (max_iters < 1) throw ConfigError("isa: max_iters must be >= 1");
  if (min_accepted < 0 || max_extra_rounds < 0) {
    throw ConfigError("isa: min_accepted and max_extra_rounds must be >= 0");
  }
  if (!(rel_tol > 0.0)) throw ConfigError("isa: rel_tol must be positive");
  if (!(collapse_rate >= 0.0 && collapse_rate < 1.0)) {
    throw ConfigError("isa: collapse_rate must lie in [0, 1)");
  }
  if (abort_patience < 1) throw ConfigError("isa: abort_patience must be >= 1");
}

PosteriorBatch sample_posterior(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                                double sigma, int R, Rng& rng, int min_accepted,
                                int max_extra_rounds) {
  if (R < 1) throw DomainError("sample_posterior: R must be at least 1");
  if (!(sigma > 0.0)) throw DomainError("sample_posterior: sigma must be positive");
  if (A.rows() != y.size()) throw ShapeError("sample_posterior: A rows differ from y");
  const Eigen::Index N = A.cols();
  const double two_var = 2.0 * sigma * sigma;
  const double M = static_cast<double>(y.size());
  const double log_norm = -M * (0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma));

  PosteriorBatch out;
  out.projection = project_to_simplex(y, A);
  const double d2 = out.projection.dist_sq;

  std::vector<Eigen::VectorXd> kept;
  double weight_sum = 0.0;  // sum of exp(-(r^2 - d^2)/(2 sigma^2)) over proposals
  Eigen::MatrixXd proposals(N, R);
  for (int round = 0; round <= max_extra_rounds; ++round) {
    for (int r = 0; r < R; ++r) proposals.col(r) = sample_uniform_simplex(rng, N);
    const Eigen::VectorXd resid = ((A * proposals).colwise() - y).colwise().squaredNorm();
    for (int r = 0; r < R; ++r) {
      const double w = std::exp(-std::max(0.0, resid(r) - d2) / two_var);
      weight_sum += w;
      if (rng.uniform() < w) kept.emplace_back(proposals.col(r));
    }
    out.proposed += R;
    if (static_cast<int>(kept.size()) >= min_accepted) break;
  }
  out.samples.resize(N, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) out.samples.col(k) = kept[k];
  out.loglik = log_norm - d2 / two_var + std::log(weight_sum / out.proposed);
  return out;
}

PosteriorBatch sample_posterior(const Eigen::Ref<const Eigen::VectorXd>& y, const VertexMatrix& A,
                                double sigma, int R, std::uint64_t seed) {
  Rng rng(seed);
  return sample_posterior(y, A, sigma, R, rng);
}

VertexMatrix mcem_update(const Eigen::MatrixXd& Y, const std::vector<Eigen::MatrixXd>& batches) {
  if (static_cast<Eigen::Index>(batches.size()) != Y.cols()) {
    throw ShapeError("mcem_update: need one batch per observation");
  }
  Eigen::Index N = -1;
  for (const auto& b : batches) {
    if (b.cols() > 0) {
      N = b.rows();
      break;
    }
  }
  if (N < 0) throw NoUpdateError("mcem_update: every batch is empty");
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(Y.rows(), N);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    const Eigen::MatrixXd& b = batches[t];
    if (b.cols() == 0) continue;
    if (b.rows() != N) throw ShapeError("mcem_update: inconsistent sample dimension");
    const double inv = 1.0 / static_cast<double>(b.cols());
    left.noalias() += Y.col(t) * (b.rowwise().sum() * inv).transpose();
    second.noalias() += (b * b.transpose()) * inv;
  }
  return left * pseudo_inverse(second);
}

SolverReport isa_prism(const Eigen::MatrixXd& Y, const IsaConfig& cfg, const VertexMatrix& A_init,
                       double sigma, const MseProbe& probe) {
  cfg.validate();
  if (!(sigma > 0.0)) throw DomainError("isa_prism: sigma must be positive");
  if (A_init.rows() != Y.rows()) throw ShapeError("isa_prism: A_init rows differ from Y");
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index T = Y.cols();

  SolverReport report;
  report.method = "isa";
  report.A = A_init;
  std::vector<Eigen::MatrixXd> batches(static_cast<std::size_t>(T));
  std::vector<PosteriorBatch> draws(static_cast<std::size_t>(T));
  int zero_streak = 0;
  bool warned_collapse = false;

  for (int k = 0; k < cfg.max_iters; ++k) {
    const VertexMatrix& A = report.A;
    parallel_for(static_cast<std::size_t>(T), [&](std::size_t t) {
      Rng rng = Rng::stream(cfg.seed, static_cast<std::uint64_t>(k), t);
      draws[t] = sample_posterior(Y.col(static_cast<Eigen::Index>(t)), A, sigma,
                                  cfg.proposals_per_point, rng, cfg.min_accepted,
                                  cfg.min_accepted > 0 ? cfg.max_extra_rounds : 0);
    });

    long accepted = 0;
    long proposed = 0;
    int empty = 0;
    double loglik = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      PosteriorBatch& d = draws[t];
      accepted += d.accepted();
      proposed += d.proposed;
      loglik += d.loglik;
      if (d.accepted() == 0) {
        // Degenerate single sample at the projection point.
        ++empty;
        batches[t] = d.projection.s;
      } else {
        batches[t] = std::move(d.samples);
      }
    }
    const double rate = static_cast<double>(accepted) / static_cast<double>(proposed);
    report.acceptance_rate.push_back(rate);
    report.empty_batches.push_back(empty);
    report.loglik.push_back(loglik / static_cast<double>(T));
    if (rate < cfg.collapse_rate) {
      report.acceptance_collapse = true;
      if (!warned_collapse) {
        report.warnings.push_back("acceptance collapse: rate " + std::to_string(rate) +
                                  " at iteration " + std::to_string(k));
        warned_collapse = true;
      }
    }
    if (empty > 0 && k == 0) {
      report.warnings.push_back("projection fallback used for points with empty batches");
    }

    zero_streak = accepted == 0 ? zero_streak + 1 : 0;
    if (zero_streak >= cfg.abort_patience) {
      report.status = SolverStatus::Aborted;
      report.warnings.push_back("aborted: rejection sampling accepted no samples for " +
                                std::to_string(zero_streak) + " consecutive iterations");
      break;
    }

    VertexMatrix next = mcem_update(Y, batches);
    const double denom = std::max(report.A.norm(), 1e-300);
    const double rel = (next - report.A).norm() / denom;
    report.A = std::move(next);
    report.rel_change.push_back(rel);
    report.iterations = k + 1;
    if (probe) report.mse.push_back(probe(report.A));
    if (rel < cfg.rel_tol) {
      report.status = SolverStatus::Converged;
      break;
    }
  }
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace prism
