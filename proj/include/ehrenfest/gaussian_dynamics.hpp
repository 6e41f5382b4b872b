// Right-hand sides of the Gaussian moment flows.
//
//   (z, X):      dz = J h_z + J h_X z
//                dX = (J h_X X - X h_X J) + (J h_z z^T - z h_z^T J) / 2
//   (z, Sigma):  dz = J h_z
//                dSigma = 2 (J h_S Sigma - Sigma h_S J)
//
// both symmetry-preserving and generated by the brackets in brackets.hpp
// (the bracket evaluation with coordinate observables is the oracle every
// assembly here is tested against).
//
// The closure energy for H = P^2/2 + V(Q) truncates V at order N about <Q>
// and takes Gaussian moments, <qt^{2k}> = (2k-1)!! var^k:
//
//   h = p^2/2 + S_pp/2 + sum_{2k <= N} V^{(2k)}(q) S_qq^k / (2^k k!)
//
// with the matrix slot holding the physical covariance. The explicit
// five-moment systems (conservative and the variant without the V^{(5)}
// terms) act on (<Q>, <P>, <Q^2>, <P^2>, <QP>_s).

#pragma once

#include <utility>

#include "ehrenfest/eigen.hpp"
#include "ehrenfest/observable.hpp"
#include "ehrenfest/potential.hpp"

namespace ehrenfest {

struct ClosureSpec {
  Potential potential;
  int truncation_order = 4;   // Taylor order N of V about <Q>
  bool conservative = true;   // keep the bracket-generated odd-derivative terms

  bool odd_truncation() const { return truncation_order % 2 == 1; }
};

// Scalar closure energy at a 1-dof state; sigma is the physical covariance.
double gaussian_energy(const ClosureSpec& spec, const Vec2& z, const Mat2& sigma);

// The same energy with analytic partials, as a (z, Sigma) functional.
// Requires V^{(N+1)} for even N (the gradient brings one extra derivative).
MomentFunctional closure_energy_functional(const ClosureSpec& spec);

// Chain rule Sigma = 2X - zz: the same energy as a (z, X) functional.
MomentFunctional to_x_functional(const MomentFunctional& sigma_form);

struct MomentRhs {
  Vec dz;
  Mat dmat;
};

MomentRhs moment_rhs(const MomentFunctional& h, const Vec& z, const Mat& x);
MomentRhs covariance_rhs(const MomentFunctional& h, const Vec& z, const Mat& sigma);

// Five-moment state (<Q>, <P>, <Q^2>, <P^2>, <QP>_s), 1 dof.
using FiveMoments = Eigen::Matrix<double, 5, 1>;

FiveMoments five_moments(const Vec2& z, const Mat2& sigma);
std::pair<Vec2, Mat2> z_sigma_from_five(const FiveMoments& m);

// Explicit fourth-order closure system; the conservative variant carries the
// V^{(5)} terms, the non-conservative one drops them. Both need
// potential.derivative_order >= 5.
FiveMoments conservative_fourth_order_rhs(const Potential& pot, const FiveMoments& m);
FiveMoments nonconservative_fourth_order_rhs(const Potential& pot, const FiveMoments& m);

}  // namespace ehrenfest
