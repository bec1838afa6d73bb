#pragma once

#include <Eigen/Dense>

namespace hgsp {

using Index = Eigen::Index;

/// Channel-major signal storage: one row per channel, contiguous in time.
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace hgsp
