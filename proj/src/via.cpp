#include "prism/via.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "prism/errors.hpp"
#include "prism/mathcore.hpp"
#include "prism/parallel.hpp"

namespace prism {

void ViaConfig::validate() const {
  if (!(rho > 0.0)) throw ConfigError("via: rho must be positive");
  if (!(admm_dual_tol > 0.0)) throw ConfigError("via: admm_dual_tol must be positive");
  if (admm_max_iters < 1) throw ConfigError("via: admm_max_iters must be >= 1");
  if (max_outer_iters < 1) throw ConfigError("via: max_outer_iters must be >= 1");
  if (!(golden_a > 0.0) || !(golden_b > golden_a)) {
    throw ConfigError("via: golden interval must satisfy 0 < a < b");
  }
  if (!(golden_tol > 0.0)) throw ConfigError("via: golden_tol must be positive");
  if (!(bisect_tol > 0.0)) throw ConfigError("via: bisect_tol must be positive");
  if (max_widenings < 0) throw ConfigError("via: max_widenings must be >= 0");
  if (!(warm_halfwidth > 0.0)) throw ConfigError("via: warm_halfwidth must be positive");
  if (!(rel_tol > 0.0)) throw ConfigError("via: rel_tol must be positive");
}

double via_h(double a) { return -log_gamma(a) + (a - 1.0) * digamma(a); }
double via_h_prime(double a) { return (a - 1.0) * trigamma(a); }
double via_h_second(double a) { return trigamma(a) + (a - 1.0) * tetragamma(a); }

double via_iota(double eta, Eigen::Index N) {
  return log_gamma(eta) - (eta - static_cast<double>(N)) * digamma(eta);
}

double via_g(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& alpha, double eta,
             const Eigen::Ref<const Eigen::VectorXd>& y, double sigma) {
  const Eigen::VectorXd Aalpha = A * alpha;
  // tr(A (Diag(alpha) + alpha alpha^T) A^T)
  const double tr = alpha.dot(A.colwise().squaredNorm().transpose()) + Aalpha.squaredNorm();
  return (-y.dot(Aalpha) / eta + tr / (2.0 * (1.0 + eta) * eta)) / (sigma * sigma);
}

double eval_f(const VertexMatrix& A, const DirichletParam& alpha,
              const Eigen::Ref<const Eigen::VectorXd>& y, double sigma) {
  if (A.cols() != alpha.size() || A.rows() != y.size()) throw ShapeError("eval_f: shape mismatch");
  if (!(sigma > 0.0)) throw DomainError("eval_f: sigma must be positive");
  const double eta = alpha.concentration();
  double acc = via_g(A, alpha.alpha(), eta, y, sigma) + via_iota(eta, alpha.size());
  for (double a : alpha.alpha()) acc += via_h(a);
  return acc;
}

double via_dropped_constant(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma,
                            Eigen::Index N) {
  const double M = static_cast<double>(y.size());
  return y.squaredNorm() / (2.0 * sigma * sigma) +
         M * (0.5 * std::log(2.0 * std::numbers::pi) + std::log(sigma)) -
         log_factorial<double>(static_cast<int>(N - 1));
}

double eval_via_objective(const VariationalState& state, const Eigen::MatrixXd& Y,
                          bool with_entropy) {
  if (static_cast<Eigen::Index>(state.alphas.size()) != Y.cols() || state.A.rows() != Y.rows()) {
    throw ShapeError("eval_via_objective: shape mismatch");
  }
  const double inv2var = 1.0 / (2.0 * state.sigma * state.sigma);
  double acc = 0.0;
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    const DirichletMoments mom = dirichlet_moments(state.alphas[t]);
    const double fit = (Y.col(t) - state.A * mom.mean).squaredNorm();
    const double tvar = (state.A * mom.cov).cwiseProduct(state.A).sum();
    acc += (fit + tvar) * inv2var;
    if (with_entropy) acc -= mom.entropy;
  }
  return acc;
}

AUpdate a_update(const Eigen::MatrixXd& Y, const std::vector<DirichletParam>& alphas) {
  if (static_cast<Eigen::Index>(alphas.size()) != Y.cols() || alphas.empty()) {
    throw ShapeError("a_update: need one concentration vector per observation");
  }
  const Eigen::Index N = alphas.front().size();
  Eigen::MatrixXd left = Eigen::MatrixXd::Zero(Y.rows(), N);
  Eigen::MatrixXd right = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index t = 0; t < Y.cols(); ++t) {
    const Eigen::VectorXd& a = alphas[t].alpha();
    if (a.size() != N) throw ShapeError("a_update: inconsistent concentration sizes");
    const double eta = a.sum();
    left.noalias() += Y.col(t) * a.transpose() / eta;
    const double w = 1.0 / ((1.0 + eta) * eta);
    right.noalias() += w * a * a.transpose();
    right.diagonal() += w * a;
  }
  AUpdate out;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(right);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-14) {
    out.A = ldlt.solve(left.transpose()).transpose();
  } else {
    out.A = left * pseudo_inverse(right);
    out.used_pinv = true;
  }
  return out;
}

VariationalProblem::VariationalProblem(const VertexMatrix& A,
                                       const Eigen::Ref<const Eigen::VectorXd>& y, double sigma)
    : gram_(A.transpose() * A), aty_(A.transpose() * y), sigma_(sigma) {
  if (A.rows() != y.size()) throw ShapeError("VariationalProblem: A rows differ from y");
  if (A.cols() < 2) throw ShapeError("VariationalProblem: need N >= 2");
  if (!(sigma > 0.0)) throw DomainError("VariationalProblem: sigma must be positive");
  null_basis_ = null_one_basis(A.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(null_basis_.transpose() * gram_ *
                                                     null_basis_);
  eigvals_ = eig.eigenvalues().cwiseMax(0.0);
  basis_ = null_basis_ * eig.eigenvectors();
}

Eigen::VectorXd VariationalProblem::linear_term(double eta) const {
  return (aty_ - gram_.diagonal() / (2.0 * (eta + 1.0))) / (sigma_ * sigma_ * eta);
}

double VariationalProblem::quad_scale(double eta) const {
  return 1.0 / (sigma_ * sigma_ * eta * (eta + 1.0));
}

double VariationalProblem::g(const Eigen::Ref<const Eigen::VectorXd>& alpha, double eta) const {
  return -alpha.dot(linear_term(eta)) + 0.5 * quad_scale(eta) * alpha.dot(gram_ * alpha);
}

double VariationalProblem::r_objective(const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  double acc = g(alpha, alpha.sum());
  for (double a : alpha) acc += via_h(a);
  return acc;
}

Eigen::VectorXd VariationalProblem::projected_gradient(
    const Eigen::Ref<const Eigen::VectorXd>& alpha) const {
  const double eta = alpha.sum();
  Eigen::VectorXd grad = -linear_term(eta) + quad_scale(eta) * (gram_ * alpha);
  for (Eigen::Index i = 0; i < alpha.size(); ++i) grad(i) += via_h_prime(alpha(i));
  return grad.array() - grad.mean();
}

Eigen::VectorXd VariationalProblem::alpha_step(const Eigen::Ref<const Eigen::VectorXd>& q,
                                               double eta, double rho) const {
  const Eigen::Index N = size();
  const double c = quad_scale(eta);
  const double share = eta / static_cast<double>(N);
  const Eigen::VectorXd rhs = q - (share * c) * gram_.rowwise().sum();
  const Eigen::VectorXd scaled =
      (basis_.transpose() * rhs).cwiseQuotient((c * eigvals_).array().matrix() +
                                               Eigen::VectorXd::Constant(N - 1, rho));
  return Eigen::VectorXd::Constant(N, share) + basis_ * scaled;
}

namespace {

// h'(a) and h''(a) sharing one recurrence shift of psi' and psi''.
void h_derivatives(double a, double& h1, double& h2) {
  double x = a;
  double tri = 0.0;
  double tet = 0.0;
  while (x < 10.0) {
    const double inv = 1.0 / x;
    const double inv2 = inv * inv;
    tri += inv2;
    tet -= 2.0 * inv2 * inv;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  tri += inv * (1.0 + inv * (0.5 + inv * (1.0 / 6 +
                                          inv2 * (-1.0 / 30 +
                                                  inv2 * (1.0 / 42 +
                                                          inv2 * (-1.0 / 30 +
                                                                  inv2 * (5.0 / 66)))))));
  tet -= inv2 * (1.0 + inv * (1.0 + inv * (0.5 + inv2 * (-1.0 / 6 +
                                                         inv2 * (1.0 / 6 +
                                                                 inv2 * (-3.0 / 10 +
                                                                         inv2 * (5.0 / 6)))))));
  h1 = (a - 1.0) * tri;
  h2 = tri + (a - 1.0) * tet;
}

}  // namespace

double beta_root(double target, double rho, double start, double rel_tol) {
  if (!(rho > 0.0) || !std::isfinite(target)) throw DomainError("beta_root: invalid arguments");
  // phi(b) = h'(b) + rho b - target is strictly increasing; keep a bracket
  // [lo, hi] that is tightened by every evaluation and fall back to halving,
  // doubling or bisection whenever a Newton step leaves it.
  const double step_tol = std::sqrt(rel_tol);
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  double b = (start > 0.0 && std::isfinite(start)) ? start : 1.0;
  for (int iter = 0; iter < 400; ++iter) {
    double h1 = 0.0;
    double h2 = 0.0;
    h_derivatives(b, h1, h2);
    const double f = h1 + rho * b - target;
    if (f == 0.0) return b;
    if (f < 0.0) {
      lo = b;
    } else {
      hi = b;
    }
    const double step = f / (h2 + rho);
    double next = b - step;
    // Newton converges quadratically, so a relative step of sqrt(rel_tol)
    // leaves a relative error of order rel_tol.
    if (std::abs(step) <= step_tol * b && next > 0.0) return next;
    if (!(next > lo && next < hi)) {
      if (std::isinf(hi)) {
        next = 2.0 * b;
      } else if (lo == 0.0) {
        next = 0.5 * b;
      } else {
        next = 0.5 * (lo + hi);
      }
    }
    if (std::abs(next - b) <= rel_tol * next) return next;
    b = next;
  }
  return b;
}

AdmmResult admm_subsolve(const VariationalProblem& problem, double eta, const ViaConfig& cfg,
                         const AdmmState* warm) {
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("admm_subsolve: eta must be positive");
  const Eigen::Index N = problem.size();
  const double share = eta / static_cast<double>(N);
  AdmmState st;
  if (warm != nullptr && warm->beta.size() == N && (warm->beta.array() > 0.0).all()) {
    st.beta = warm->beta * (eta / warm->beta.sum());
  } else {
    st.beta = Eigen::VectorXd::Constant(N, share);
  }
  st.lambda_dual.resize(N);
  for (Eigen::Index i = 0; i < N; ++i) st.lambda_dual(i) = via_h_prime(st.beta(i));

  // alpha = share 1 + W diag(1 / (c Lambda + rho)) W^T (rhs0 + rho beta - lambda).
  const double rho = cfg.rho;
  const double c = problem.quad_scale(eta);
  const Eigen::VectorXd rhs0 =
      problem.linear_term(eta) - (share * c) * problem.gram().rowwise().sum();
  const Eigen::VectorXd inv_diag =
      ((c * problem.eigenvalues()).array() + rho).inverse().matrix();
  const Eigen::MatrixXd& W = problem.basis();
  Eigen::VectorXd q(N);
  Eigen::VectorXd z(N - 1);
  st.alpha.resize(N);
  const double* w = W.data();
  double* alpha_p = st.alpha.data();
  double* beta_p = st.beta.data();
  double* lambda_p = st.lambda_dual.data();

  AdmmResult out;
  for (int k = 1; k <= cfg.admm_max_iters; ++k) {
    for (Eigen::Index i = 0; i < N; ++i) q(i) = rhs0(i) + rho * beta_p[i] - lambda_p[i];
    for (Eigen::Index j = 0; j < N - 1; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < N; ++i) acc += w[j * N + i] * q(i);
      z(j) = acc * inv_diag(j);
    }
    double primal = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
      double a = share;
      for (Eigen::Index j = 0; j < N - 1; ++j) a += w[j * N + i] * z(j);
      alpha_p[i] = a;
      beta_p[i] = beta_root(lambda_p[i] + rho * a, rho, beta_p[i], cfg.bisect_tol);
      const double d = a - beta_p[i];
      lambda_p[i] += rho * d;
      primal += d * d;
    }
    out.iterations = k;
    if (std::sqrt(primal) <= cfg.admm_dual_tol) {
      out.converged = true;
      break;
    }
  }
  // beta is strictly positive by construction; rescale it onto 1^T alpha = eta.
  Eigen::VectorXd alpha = st.beta * (eta / st.beta.sum());
  out.r_value = problem.r_objective(alpha);
  st.zeta = problem.null_basis().transpose() * (alpha.array() - share).matrix();
  out.alpha = DirichletParam(std::move(alpha));
  out.state = std::move(st);
  return out;
}

AdmmResult admm_subsolve(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                         double sigma, double eta, const ViaConfig& cfg) {
  cfg.validate();
  return admm_subsolve(VariationalProblem(A, y, sigma), eta, cfg);
}

namespace {

struct Evaluation {
  double log_eta = 0.0;
  double value = 0.0;
  AdmmResult result;
};

}  // namespace

VariationalSolution solve_variational(const VariationalProblem& problem, const ViaConfig& cfg,
                                      const VariationalSolution* warm) {
  const Eigen::Index N = problem.size();
  const double inv_phi = 1.0 / std::numbers::phi;
  const bool use_warm = warm != nullptr && cfg.warm_start && warm->eta > 0.0;
  VariationalSolution out;
  // Solved states keyed by log eta; each solve starts from the nearest one.
  std::vector<std::pair<double, AdmmState>> states;
  if (use_warm) states.emplace_back(std::log(warm->eta), warm->state);

  auto evaluate = [&](double log_eta) {
    const AdmmState* start = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [key, st] : states) {
      if (std::abs(key - log_eta) < best) {
        best = std::abs(key - log_eta);
        start = &st;
      }
    }
    const double eta = std::exp(log_eta);
    Evaluation ev{log_eta, 0.0, admm_subsolve(problem, eta, cfg, start)};
    ev.value = ev.result.r_value + via_iota(eta, N);
    out.admm_iterations += ev.result.iterations;
    out.admm_warning = out.admm_warning || !ev.result.converged;
    ++out.evaluations;
    states.emplace_back(log_eta, ev.result.state);
    return ev;
  };

  double range_lo = std::log(cfg.golden_a);
  double range_hi = std::log(cfg.golden_b);
  if (use_warm) {
    const double center = std::log(warm->eta);
    range_lo = center - cfg.warm_halfwidth;
    range_hi = center + cfg.warm_halfwidth;
  }
  double mid = 0.0;
  for (;;) {
    double lo = range_lo;
    double hi = range_hi;
    Evaluation e1 = evaluate(hi - (hi - lo) * inv_phi);
    Evaluation e2 = evaluate(lo + (hi - lo) * inv_phi);
    while (hi - lo > cfg.golden_tol) {
      if (e1.value < e2.value) {
        hi = e2.log_eta;
        e2 = std::move(e1);
        e1 = evaluate(hi - (hi - lo) * inv_phi);
      } else {
        lo = e1.log_eta;
        e1 = std::move(e2);
        e2 = evaluate(lo + (hi - lo) * inv_phi);
      }
    }
    mid = 0.5 * (lo + hi);
    const double margin = 0.05 * (range_hi - range_lo);
    if (out.widenings >= cfg.max_widenings) break;
    if (mid - range_lo < margin) {
      range_lo -= std::log(10.0);
    } else if (range_hi - mid < margin) {
      range_hi += std::log(10.0);
    } else {
      break;
    }
    ++out.widenings;
  }

  Evaluation final_eval = evaluate(mid);
  out.eta = std::exp(mid);
  out.objective = final_eval.value;
  out.alpha = final_eval.result.alpha;
  out.state = std::move(final_eval.result.state);
  return out;
}

VariationalSolution solve_variational(const VertexMatrix& A,
                                      const Eigen::Ref<const Eigen::VectorXd>& y, double sigma,
                                      const ViaConfig& cfg) {
  cfg.validate();
  return solve_variational(VariationalProblem(A, y, sigma), cfg);
}

EtaProfileAudit audit_eta_profile(const VariationalProblem& problem, const ViaConfig& cfg,
                                  int grid_points, double tol) {
  if (grid_points < 3) throw DomainError("audit_eta_profile: need at least 3 grid points");
  EtaProfileAudit out;
  out.eta.resize(grid_points);
  out.value.resize(grid_points);
  const double lo = std::log(cfg.golden_a);
  const double hi = std::log(cfg.golden_b);
  AdmmState state;
  bool have = false;
  for (int i = 0; i < grid_points; ++i) {
    const double eta = std::exp(lo + (hi - lo) * i / (grid_points - 1));
    AdmmResult res = admm_subsolve(problem, eta, cfg, have ? &state : nullptr);
    out.eta(i) = eta;
    out.value(i) = res.r_value + via_iota(eta, problem.size());
    out.converged.push_back(res.converged ? 1 : 0);
    state = res.state;
    have = true;
  }
  std::vector<int> signs;
  for (int i = 1; i < grid_points; ++i) {
    const double d = out.value(i) - out.value(i - 1);
    if (std::abs(d) > tol) signs.push_back(d > 0 ? 1 : -1);
  }
  int minima = 0;
  if (!signs.empty()) {
    if (signs.front() > 0) ++minima;
    if (signs.back() < 0) ++minima;
    for (std::size_t i = 1; i < signs.size(); ++i) {
      if (signs[i - 1] < 0 && signs[i] > 0) ++minima;
    }
  }
  out.local_minima = std::max(minima, 1);
  out.unimodal = out.local_minima == 1;
  return out;
}

SolverReport via_prism(const Eigen::MatrixXd& Y, const ViaConfig& cfg, const VertexMatrix& A_init,
                       double sigma, const MseProbe& probe) {
  cfg.validate();
  if (!(sigma > 0.0)) throw DomainError("via_prism: sigma must be positive");
  if (A_init.rows() != Y.rows()) throw ShapeError("via_prism: A_init rows differ from Y");
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index T = Y.cols();
  const Eigen::Index N = A_init.cols();

  SolverReport report;
  report.method = "via";
  report.A = A_init;
  VariationalState state{A_init, std::vector<DirichletParam>(T, DirichletParam::uniform(N)), sigma};
  std::vector<VariationalSolution> solutions(static_cast<std::size_t>(T));
  std::vector<char> have_solution(static_cast<std::size_t>(T), 0);
  std::vector<int> kept_old(static_cast<std::size_t>(T), 0);
  long capped_solves = 0;

  auto variational_sweep = [&](bool first) {
    std::vector<char> admm_warn(static_cast<std::size_t>(T), 0);
    parallel_for(static_cast<std::size_t>(T), [&](std::size_t t) {
      const auto col = static_cast<Eigen::Index>(t);
      const VariationalProblem problem(state.A, Y.col(col), sigma);
      const VariationalSolution* warm = have_solution[t] ? &solutions[t] : nullptr;
      VariationalSolution sol = solve_variational(problem, cfg, warm);
      admm_warn[t] = sol.admm_warning ? 1 : 0;
      // Accept only non-increasing updates so the sweep is a descent step.
      const double f_new = eval_f(state.A, sol.alpha, Y.col(col), sigma);
      const double f_old = eval_f(state.A, state.alphas[t], Y.col(col), sigma);
      if (first || f_new <= f_old) {
        state.alphas[t] = sol.alpha;
        kept_old[t] = 0;
      } else {
        kept_old[t] = 1;
      }
      solutions[t] = std::move(sol);
      have_solution[t] = 1;
    });
    std::vector<double> etas(static_cast<std::size_t>(T));
    double admm_sum = 0.0;
    int admm_max = 0;
    for (Eigen::Index t = 0; t < T; ++t) {
      etas[t] = state.alphas[t].concentration();
      admm_sum += solutions[t].admm_iterations;
      admm_max = std::max(admm_max, solutions[t].admm_iterations);
      capped_solves += admm_warn[t];
    }
    std::sort(etas.begin(), etas.end());
    report.eta_min.push_back(etas.front());
    report.eta_max.push_back(etas.back());
    report.eta_median.push_back(etas[etas.size() / 2]);
    report.admm_iters_mean.push_back(admm_sum / static_cast<double>(T));
    report.admm_iters_max.push_back(admm_max);
    report.objective.push_back(eval_via_objective(state, Y));
  };

  variational_sweep(true);
  for (int k = 0; k < cfg.max_outer_iters; ++k) {
    AUpdate upd = a_update(Y, state.alphas);
    if (upd.used_pinv && !report.used_pinv) {
      report.used_pinv = true;
      report.warnings.push_back("A update fell back to the pseudo-inverse");
    }
    const double rel = (upd.A - state.A).norm() / std::max(state.A.norm(), 1e-300);
    state.A = std::move(upd.A);
    variational_sweep(false);
    report.rel_change.push_back(rel);
    report.iterations = k + 1;
    if (probe) report.mse.push_back(probe(state.A));
    if (rel < cfg.rel_tol) {
      report.status = SolverStatus::Converged;
      break;
    }
  }
  if (capped_solves > 0) {
    report.warnings.push_back("ADMM reached its iteration cap in " + std::to_string(capped_solves) +
                              " per-point searches (typically at small eta)");
  }
  report.A = state.A;
  report.notes["dropped_constant"] =
      "objective omits M log(sqrt(2 pi) sigma) - log (N-1)! per point";
  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace prism
