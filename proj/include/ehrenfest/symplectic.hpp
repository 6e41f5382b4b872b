// Canonical symplectic structure on R^{2n}, phase-space point ordering
// (q_1..q_n, p_1..p_n), and the Williamson admissibility test for Gaussian
// covariances.

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "ehrenfest/eigen.hpp"

namespace ehrenfest {

// Canonical form J with {q_i, p_i} = +1: J(q_i, p_i) = +1, J(p_i, q_i) = -1,
// so that zdot = J grad H gives qdot = dH/dp.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> symplectic_form(Eigen::Index n) {
  if (n < 1) throw std::invalid_argument("symplectic_form: dof count must be >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> j =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    j(i, n + i) = Scalar(1);
    j(n + i, i) = Scalar(-1);
  }
  return j;
}

// || S^T J S - J ||_max; zero iff S is symplectic.
inline double symplectic_defect(const Mat& s) {
  const Mat j = symplectic_form(s.rows() / 2);
  return (s.transpose() * j * s - j).cwiseAbs().maxCoeff();
}

// Symplectic eigenvalues of a symmetric positive-definite matrix c: the
// moduli nu_k > 0 of the (purely imaginary) eigenvalues of J c, each listed
// once, ascending.
inline std::vector<double> symplectic_eigenvalues(const Mat& c) {
  const Index n = c.rows() / 2;
  if (c.rows() != c.cols() || c.rows() != 2 * n || n < 1)
    throw std::invalid_argument("symplectic_eigenvalues: need a 2n x 2n matrix");
  if (symmetry_defect(c) > 1e-10 * (1.0 + c.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("symplectic_eigenvalues: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> chk(c);
  if (chk.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("symplectic_eigenvalues: matrix not positive definite");

  const Mat j = symplectic_form(n);
  Eigen::EigenSolver<Mat> es(j * c);
  std::vector<double> nus;
  for (Index k = 0; k < 2 * n; ++k) {
    const double im = es.eigenvalues()(k).imag();
    if (im > 0.0) nus.push_back(im);
  }
  std::sort(nus.begin(), nus.end());
  return nus;
}

// Williamson criterion: hbar * Sigma is the covariance of a genuine quantum
// state iff every symplectic eigenvalue of hbar * Sigma is >= hbar / 2.
inline bool uncertainty_admissible(const Mat& sigma, double hbar, double tol = 1e-12) {
  if (hbar <= 0.0) throw std::invalid_argument("uncertainty_admissible: hbar must be positive");
  const std::vector<double> nus = symplectic_eigenvalues(hbar * sigma);
  return nus.front() >= 0.5 * hbar - tol;
}

// exp(J A) with A symmetric is symplectic; `scale` controls how far from the
// identity the sample lands.
inline Mat random_symplectic(Index n, std::mt19937_64& rng, double scale = 0.5) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Mat a(2 * n, 2 * n);
  for (Index i = 0; i < 2 * n; ++i)
    for (Index k = i; k < 2 * n; ++k) a(i, k) = a(k, i) = u(rng);
  const Mat gen = symplectic_form(n) * a;
  return gen.exp();
}

}  // namespace ehrenfest
