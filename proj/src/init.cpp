#include "prism/init.hpp"

#include "prism/errors.hpp"

namespace prism {

PurePixelResult pure_pixel_init(const Eigen::MatrixXd& Y, Eigen::Index N) {
  const Eigen::Index M = Y.rows();
  const Eigen::Index T = Y.cols();
  if (N < 1) throw ShapeError("pure_pixel_init: N must be at least 1");
  if (T < N) throw InsufficientDataError("pure_pixel_init: need at least N observations");

  // Centred data with a constant row: selections do not depend on translation.
  Eigen::MatrixXd R(M + 1, T);
  R.topRows(M) = Y.colwise() - Y.rowwise().mean();
  R.row(M).setOnes();

  PurePixelResult out;
  out.A.resize(M, N);
  Eigen::VectorXd norms = R.colwise().squaredNorm().transpose();
  std::vector<bool> taken(static_cast<std::size_t>(T), false);
  for (Eigen::Index k = 0; k < N; ++k) {
    Eigen::Index best = -1;
    for (Eigen::Index t = 0; t < T; ++t) {
      if (taken[t]) continue;
      if (best < 0 || norms(t) > norms(best)) best = t;
    }
    taken[best] = true;
    out.indices.push_back(best);
    out.A.col(k) = Y.col(best);

    const double nrm = R.col(best).norm();
    if (nrm == 0.0) continue;
    const Eigen::VectorXd u = R.col(best) / nrm;
    R -= u * (u.transpose() * R);
    norms = R.colwise().squaredNorm().transpose();
  }
  return out;
}

}  // namespace prism
