#pragma once

#include <Eigen/Dense>

namespace tokattr {

// All analysis-path arithmetic is carried out in double precision. Stored
// weights may be f32 on disk; they are widened on load.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

}  // namespace tokattr
