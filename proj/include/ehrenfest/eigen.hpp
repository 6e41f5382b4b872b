// Central Eigen include and the dense type aliases used across the library.

#pragma once

#include <Eigen/Dense>

namespace ehrenfest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using Grid2D = Eigen::ArrayXXd;  // (nq x np), row index = q, column index = p

using Eigen::Index;

// Symmetric part, 1/2 (A + A^T).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
symmetrized(const Eigen::MatrixBase<Derived>& a) {
  return 0.5 * (a + a.transpose());
}

// Largest absolute deviation from symmetry.
template <typename Derived>
typename Derived::Scalar symmetry_defect(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace ehrenfest
