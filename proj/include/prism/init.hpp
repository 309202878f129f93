#pragma once

#include <Eigen/Dense>

#include <vector>

#include "prism/model.hpp"

namespace prism {

struct PurePixelResult {
  VertexMatrix A;  // selected data columns
  std::vector<Eigen::Index> indices;
};

// Successive projection on the mean-centred columns of Y augmented with a
// constant row: pick the largest-norm column, project every column onto the orthogonal
// complement of the pick, repeat N times. Ties go to the lowest index.
PurePixelResult pure_pixel_init(const Eigen::MatrixXd& Y, Eigen::Index N);

}  // namespace prism
