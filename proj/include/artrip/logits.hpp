// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>

namespace artrip {

/// m x |P| scores, one row per trip position.
using LogitMatrix = Eigen::MatrixXd;
using LogitRow = Eigen::RowVectorXd;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

}  // namespace artrip
