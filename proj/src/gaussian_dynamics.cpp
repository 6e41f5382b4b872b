#include "ehrenfest/gaussian_dynamics.hpp"

#include <cmath>
#include <stdexcept>

#include "ehrenfest/symplectic.hpp"

namespace ehrenfest {

namespace {

// 1 / (2^k k!)  -- the (2k-1)!!/(2k)! Gaussian moment coefficient.
double closure_coeff(int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c /= 2.0 * i;
  return c;
}

void check_1dof(const Vec& z) {
  if (z.size() != 2) throw std::invalid_argument("gaussian closure energies are 1-dof");
}

}  // namespace

double gaussian_energy(const ClosureSpec& spec, const Vec2& z, const Mat2& sigma) {
  const double q = z(0), p = z(1);
  const double var = sigma(0, 0);
  double h = 0.5 * p * p + 0.5 * sigma(1, 1);
  if (spec.potential.kind() == Potential::Kind::step) {
    return h + spec.potential.smeared_step(q, var);
  }
  const int n = spec.truncation_order;
  if (n > spec.potential.derivative_order())
    throw PotentialError("closure truncation order exceeds available potential derivatives");
  for (int k = 0; 2 * k <= n; ++k) h += spec.potential.derivative(2 * k, q) * std::pow(var, k) * closure_coeff(k);
  return h;
}

MomentFunctional closure_energy_functional(const ClosureSpec& spec) {
  const Potential pot = spec.potential;
  const int n = spec.truncation_order;
  const bool step_kind = pot.kind() == Potential::Kind::step;
  if (!step_kind) {
    if (n > pot.derivative_order())
      throw PotentialError("closure truncation order exceeds available potential derivatives");
    if (n % 2 == 0 && n + 1 > pot.derivative_order())
      throw PotentialError("closure gradient needs V^(N+1); raise derivative_order");
  }

  MomentFunctional f;
  f.value = [spec](const Vec& z, const Mat& sigma) {
    check_1dof(z);
    return gaussian_energy(spec, z.head<2>(), sigma.topLeftCorner<2, 2>());
  };
  f.grad_z = [pot, n, step_kind](const Vec& z, const Mat& sigma) {
    check_1dof(z);
    const double q = z(0), var = sigma(0, 0);
    Vec g(2);
    if (step_kind) {
      g(0) = pot.smeared_step_dq(q, var);
    } else {
      double dq = 0.0;
      for (int k = 0; 2 * k <= n; ++k) dq += pot.derivative(2 * k + 1, q) * std::pow(var, k) * closure_coeff(k);
      g(0) = dq;
    }
    g(1) = z(1);
    return g;
  };
  f.grad_mat = [pot, n, step_kind](const Vec& z, const Mat& sigma) {
    check_1dof(z);
    const double q = z(0), var = sigma(0, 0);
    Mat g = Mat::Zero(2, 2);
    if (step_kind) {
      g(0, 0) = pot.smeared_step_dvar(q, var);
    } else {
      double dv = 0.0;
      for (int k = 1; 2 * k <= n; ++k)
        dv += pot.derivative(2 * k, q) * static_cast<double>(k) * std::pow(var, k - 1) * closure_coeff(k);
      g(0, 0) = dv;
    }
    g(1, 1) = 0.5;
    return g;
  };
  return f;
}

MomentFunctional to_x_functional(const MomentFunctional& sigma_form) {
  MomentFunctional f;
  f.fd_step = sigma_form.fd_step;
  f.value = [sigma_form](const Vec& z, const Mat& x) {
    return sigma_form.value(z, 2.0 * x - z * z.transpose());
  };
  if (sigma_form.analytic()) {
    f.grad_z = [sigma_form](const Vec& z, const Mat& x) {
      const Mat sigma = 2.0 * x - z * z.transpose();
      return (sigma_form.grad_z(z, sigma) - 2.0 * sigma_form.grad_mat(z, sigma) * z).eval();
    };
    f.grad_mat = [sigma_form](const Vec& z, const Mat& x) {
      return (2.0 * sigma_form.grad_mat(z, 2.0 * x - z * z.transpose())).eval();
    };
  }
  return f;
}

namespace {

constexpr double kSymTol = 1e-12;

void require_symmetric_gradient(const Mat& g) {
  if (symmetry_defect(g) > kSymTol * (1.0 + g.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("moment flow: dh/dM must be symmetric");
}

}  // namespace

MomentRhs moment_rhs(const MomentFunctional& h, const Vec& z, const Mat& x) {
  const Mat j = symplectic_form(z.size() / 2);
  const Vec hz = eval_grad_z(h, z, x).first;
  const Mat hx = eval_grad_mat(h, z, x).first;
  require_symmetric_gradient(hx);
  MomentRhs r;
  r.dz = j * hz + j * hx * z;
  const Mat a = j * hx * x - x * hx * j;
  const Mat b = j * hz * z.transpose() - z * hz.transpose() * j;
  r.dmat = a + 0.5 * b;
  return r;
}

MomentRhs covariance_rhs(const MomentFunctional& h, const Vec& z, const Mat& sigma) {
  const Mat j = symplectic_form(z.size() / 2);
  const Vec hz = eval_grad_z(h, z, sigma).first;
  const Mat hs = eval_grad_mat(h, z, sigma).first;
  require_symmetric_gradient(hs);
  MomentRhs r;
  r.dz = j * hz;
  r.dmat = 2.0 * (j * hs * sigma - sigma * hs * j);
  return r;
}

FiveMoments five_moments(const Vec2& z, const Mat2& sigma) {
  FiveMoments m;
  m << z(0), z(1), sigma(0, 0) + z(0) * z(0), sigma(1, 1) + z(1) * z(1), sigma(0, 1) + z(0) * z(1);
  return m;
}

std::pair<Vec2, Mat2> z_sigma_from_five(const FiveMoments& m) {
  Vec2 z(m(0), m(1));
  Mat2 sigma;
  sigma << m(2) - m(0) * m(0), m(4) - m(0) * m(1), m(4) - m(0) * m(1), m(3) - m(1) * m(1);
  return {z, sigma};
}

namespace {

FiveMoments fourth_order_rhs(const Potential& pot, const FiveMoments& m, bool keep_fifth) {
  if (pot.derivative_order() < 5)
    throw PotentialError("fourth-order closure systems need derivative_order >= 5");
  const double q = m(0), p = m(1);
  const double var = m(2) - q * q;          // <Q^2> - <Q>^2
  const double cov = m(4) - q * p;          // <QP>_s - <Q><P>
  const double v1 = pot.derivative(1, q);
  const double v2 = pot.derivative(2, q);
  const double v3 = pot.derivative(3, q);
  const double v4 = pot.derivative(4, q);
  const double v5 = keep_fifth ? pot.derivative(5, q) : 0.0;

  FiveMoments d;
  d(0) = p;
  d(1) = -v1 - 0.5 * v3 * var - 0.125 * v5 * var * var;
  d(2) = 2.0 * m(4);
  d(3) = -2.0 * v1 * p - 2.0 * v2 * cov - v3 * p * var - v4 * cov * var - 0.25 * v5 * p * var * var;
  d(4) = m(3) - v1 * q - v2 * var - 0.5 * v3 * q * var - 0.5 * v4 * var * var -
         0.125 * v5 * q * var * var;
  return d;
}

}  // namespace

FiveMoments conservative_fourth_order_rhs(const Potential& pot, const FiveMoments& m) {
  return fourth_order_rhs(pot, m, true);
}

FiveMoments nonconservative_fourth_order_rhs(const Potential& pot, const FiveMoments& m) {
  return fourth_order_rhs(pot, m, false);
}

}  // namespace ehrenfest
