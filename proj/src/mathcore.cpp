#include "prism/mathcore.hpp"

namespace prism {

void Tolerances::validate() const {
  if (!(rel_eps > 0) || !(abs_eps > 0) || !(pinv_cutoff > 0) || !(pinv_cutoff < 1)) {
    throw DomainError("Tolerances: all fields must be positive and pinv_cutoff < 1");
  }
}

Eigen::MatrixXd pseudo_inverse(const Eigen::Ref<const Eigen::MatrixXd>& X,
                               const Tolerances& tol) {
  tol.validate();
  if (!X.allFinite()) throw DomainError("pseudo_inverse: non-finite entries");
  if (X.size() == 0) return Eigen::MatrixXd::Zero(X.cols(), X.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double cutoff = tol.pinv_cutoff * (sv.size() > 0 ? sv(0) : 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > cutoff && sv(i) > 0) inv(i) = 1.0 / sv(i);
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace prism
