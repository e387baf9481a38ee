#pragma once

#include <Eigen/Dense>

namespace inertia_hd {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

}  // namespace inertia_hd
