#pragma once

// Variational approximation with Dirichlet posteriors: per point, minimise
//   f(A, alpha; y) = g(A, alpha, 1^T alpha; y) + sum_i h(alpha_i) + iota(1^T alpha)
// by a golden-section search over eta = 1^T alpha, each step solving the
// strictly convex fixed-eta problem with ADMM; alternate with the closed-form
// least-squares update of A.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "prism/model.hpp"
#include "prism/report.hpp"

namespace prism {

struct ViaConfig {
  double rho = 0.01;
  double admm_dual_tol = 0.005;
  int admm_max_iters = 5000;
  int max_outer_iters = 100;
  double golden_a = 0.1;
  double golden_b = 1e4;
  // Search stops when log(eta2 / eta1) falls below this.
  double golden_tol = 1e-3;
  // Relative tolerance of the scalar root solves in the beta step.
  double bisect_tol = 1e-12;
  int max_widenings = 2;
  double rel_tol = 1e-6;
  bool warm_start = true;
  // Warm-started searches use [eta_prev e^-w, eta_prev e^w], widened like the
  // cold interval when the minimiser lands near an end.
  double warm_halfwidth = 0.25;

  void validate() const;
  bool operator==(const ViaConfig&) const = default;
};

struct VariationalState {
  VertexMatrix A;
  std::vector<DirichletParam> alphas;
  double sigma = 1.0;
};

struct AdmmState {
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd lambda_dual;
  Eigen::VectorXd zeta;
};

// h(a) = -log Gamma(a) + (a - 1) psi(a) and its derivatives.
double via_h(double a);
double via_h_prime(double a);
double via_h_second(double a);
// iota(eta) = log Gamma(eta) - (eta - N) psi(eta).
double via_iota(double eta, Eigen::Index N);
// g(A, alpha, eta; y) = (1/sigma^2)(-y^T A alpha / eta
//                       + tr(A R(alpha) A^T) / (2 (1 + eta) eta)),
// R(alpha) = Diag(alpha) + alpha alpha^T.
double via_g(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& alpha, double eta,
             const Eigen::Ref<const Eigen::VectorXd>& y, double sigma);

// f without the constant C returned by via_dropped_constant.
double eval_f(const VertexMatrix& A, const DirichletParam& alpha,
              const Eigen::Ref<const Eigen::VectorXd>& y, double sigma);

// C = ||y||^2/(2 sigma^2) + M log(sqrt(2 pi) sigma) - log (N-1)!, so that
// eval_f + C equals the negative evidence lower bound of the point.
double via_dropped_constant(const Eigen::Ref<const Eigen::VectorXd>& y, double sigma,
                            Eigen::Index N);

// (1/(2 sigma^2)) (||Y - A E[S]||^2 + TVar(A S)) - H(S) from the Dirichlet
// closed forms. With with_entropy = false the -H(S) term is omitted.
double eval_via_objective(const VariationalState& state, const Eigen::MatrixXd& Y,
                          bool with_entropy = true);

struct AUpdate {
  VertexMatrix A;
  bool used_pinv = false;
};

// A = [sum_t y_t alpha_t^T / eta_t] [sum_t R(alpha_t) / ((1 + eta_t) eta_t)]^{-1}.
AUpdate a_update(const Eigen::MatrixXd& Y, const std::vector<DirichletParam>& alphas);

// Data shared by every fixed-eta solve for one (A, y, sigma).
class VariationalProblem {
 public:
  VariationalProblem(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                     double sigma);

  Eigen::Index size() const { return gram_.rows(); }
  double sigma() const { return sigma_; }
  // Linear and quadratic coefficients of g(alpha) at fixed eta.
  Eigen::VectorXd linear_term(double eta) const;
  double quad_scale(double eta) const;
  double g(const Eigen::Ref<const Eigen::VectorXd>& alpha, double eta) const;
  // g + sum h at alpha (eta = 1^T alpha).
  double r_objective(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;
  // Projected gradient of g + sum h onto {1^T d = 0}.
  Eigen::VectorXd projected_gradient(const Eigen::Ref<const Eigen::VectorXd>& alpha) const;

  // argmin_{1^T alpha = eta} -alpha^T q + 0.5 alpha^T (C + rho I) alpha.
  Eigen::VectorXd alpha_step(const Eigen::Ref<const Eigen::VectorXd>& q, double eta,
                             double rho) const;

  const Eigen::MatrixXd& gram() const { return gram_; }
  const Eigen::MatrixXd& null_basis() const { return null_basis_; }
  const Eigen::MatrixXd& basis() const { return basis_; }
  const Eigen::VectorXd& eigenvalues() const { return eigvals_; }

 private:
  Eigen::MatrixXd gram_;        // A^T A
  Eigen::VectorXd aty_;         // A^T y
  Eigen::MatrixXd null_basis_;  // U
  Eigen::MatrixXd basis_;       // U V, V eigenvectors of U^T A^T A U
  Eigen::VectorXd eigvals_;     // eigenvalues of U^T A^T A U
  double sigma_;
};

// Root of (b - 1) psi'(b) + rho b = target, b > 0: bracket expansion then
// Newton steps safeguarded by bisection.
double beta_root(double target, double rho, double start, double rel_tol);

struct AdmmResult {
  DirichletParam alpha;  // satisfies 1^T alpha = eta
  double r_value = 0.0;  // g + sum h at alpha
  int iterations = 0;
  bool converged = false;
  AdmmState state;
};

AdmmResult admm_subsolve(const VariationalProblem& problem, double eta, const ViaConfig& cfg,
                         const AdmmState* warm = nullptr);
AdmmResult admm_subsolve(const VertexMatrix& A, const Eigen::Ref<const Eigen::VectorXd>& y,
                         double sigma, double eta, const ViaConfig& cfg);

struct VariationalSolution {
  DirichletParam alpha;
  double eta = 0.0;
  double objective = 0.0;  // r(eta) + iota(eta) at the returned alpha
  int admm_iterations = 0;
  int evaluations = 0;
  int widenings = 0;
  bool admm_warning = false;
  AdmmState state;
};

// Golden-section search on log eta over [golden_a, golden_b] (or around the
// warm solution); an interval whose minimiser lands within 5% of an end is
// widened tenfold on that side.
VariationalSolution solve_variational(const VariationalProblem& problem, const ViaConfig& cfg,
                                      const VariationalSolution* warm = nullptr);
VariationalSolution solve_variational(const VertexMatrix& A,
                                      const Eigen::Ref<const Eigen::VectorXd>& y, double sigma,
                                      const ViaConfig& cfg);

// r(eta) + iota(eta) on a log-spaced grid; counts interior local minima that
// stand out from their neighbours by more than tol.
struct EtaProfileAudit {
  Eigen::VectorXd eta;
  Eigen::VectorXd value;
  // ADMM met its dual tolerance at this grid point.
  std::vector<char> converged;
  int local_minima = 0;
  bool unimodal = true;
};

EtaProfileAudit audit_eta_profile(const VariationalProblem& problem, const ViaConfig& cfg,
                                  int grid_points = 200, double tol = 1e-7);

SolverReport via_prism(const Eigen::MatrixXd& Y, const ViaConfig& cfg, const VertexMatrix& A_init,
                       double sigma, const MseProbe& probe = {});

}  // namespace prism
