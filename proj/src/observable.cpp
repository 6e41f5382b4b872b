#include "ehrenfest/observable.hpp"

#include <cmath>
#include <stdexcept>

namespace ehrenfest {

Vec fd_grad_z(const std::function<double(const Vec&, const Mat&)>& f, const Vec& z,
              const Mat& m, double h) {
  Vec g(z.size());
  Vec zp = z;
  for (Index i = 0; i < z.size(); ++i) {
    zp(i) = z(i) + h;
    const double fp = f(zp, m);
    zp(i) = z(i) - h;
    const double fm = f(zp, m);
    zp(i) = z(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("fd_grad_z: non-finite functional evaluation");
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

Mat fd_grad_mat(const std::function<double(const Vec&, const Mat&)>& f, const Vec& z,
                const Mat& m, double h) {
  const Index d = m.rows();
  Mat g(d, d);
  Mat mp = m;
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      // perturb along the symmetric direction E_ij + E_ji (E_ii on diagonal);
      // df = Tr(f_M dM) then isolates f_M entries up to the off-diagonal factor 2
      const double step  = h;
      mp(i, j) = m(i, j) + step;
      if (i != j) mp(j, i) = m(j, i) + step;
      const double fp = f(z, mp);
      mp(i, j) = m(i, j) - step;
      if (i != j) mp(j, i) = m(j, i) - step;
      const double fm = f(z, mp);
      mp(i, j) = m(i, j);
      if (i != j) mp(j, i) = m(j, i);
      if (!std::isfinite(fp) || !std::isfinite(fm))
        throw std::runtime_error("fd_grad_mat: non-finite functional evaluation");
      const double d1 = (fp - fm) / (2.0 * step);
      if (i == j) {
        g(i, i) = d1;
      } else {
        g(i, j) = g(j, i) = 0.5 * d1;
      }
    }
  return g;
}

std::pair<Vec, std::optional<double>> eval_grad_z(const MomentFunctional& f, const Vec& z,
                                                  const Mat& m) {
  if (f.grad_z) return {f.grad_z(z, m), std::nullopt};
  return {fd_grad_z(f.value, z, m, f.fd_step), f.fd_step};
}

std::pair<Mat, std::optional<double>> eval_grad_mat(const MomentFunctional& f, const Vec& z,
                                                    const Mat& m) {
  if (f.grad_mat) return {f.grad_mat(z, m), std::nullopt};
  return {fd_grad_mat(f.value, z, m, f.fd_step), f.fd_step};
}

MomentFunctional from_polynomial(const Polynomial& p) {
  MomentFunctional f;
  f.value = [p](const Vec& z, const Mat& m) { return p.eval(z, m); };
  f.grad_z = [p](const Vec& z, const Mat& m) { return p.grad_z(z, m); };
  f.grad_mat = [p](const Vec& z, const Mat& m) { return p.grad_mat(z, m); };
  return f;
}

MomentFunctional matrix_entry_observable(int i, int j) {
  MomentFunctional f;
  f.value = [i, j](const Vec&, const Mat& m) { return m(i, j); };
  f.grad_z = [](const Vec& z, const Mat&) { return Vec::Zero(z.size()).eval(); };
  f.grad_mat = [i, j](const Vec&, const Mat& m) {
    Mat g = Mat::Zero(m.rows(), m.cols());
    if (i == j) {
      g(i, i) = 1.0;
    } else {
      g(i, j) = g(j, i) = 0.5;
    }
    return g;
  };
  return f;
}

MomentFunctional vector_entry_observable(int i) {
  MomentFunctional f;
  f.value = [i](const Vec& z, const Mat&) { return z(i); };
  f.grad_z = [i](const Vec& z, const Mat&) {
    Vec g = Vec::Zero(z.size());
    g(i) = 1.0;
    return g;
  };
  f.grad_mat = [](const Vec&, const Mat& m) { return Mat::Zero(m.rows(), m.cols()).eval(); };
  return f;
}

MomentFunctional quadratic_energy_x(const Mat& s, const Vec& w) {
  const Mat ss = symmetrized(s);
  MomentFunctional f;
  f.value = [ss, w](const Vec& z, const Mat& x) {
    return (ss * x).trace() + w.dot(z);
  };
  f.grad_z = [w](const Vec&, const Mat&) { return w; };
  f.grad_mat = [ss](const Vec&, const Mat&) { return ss; };
  return f;
}

MomentFunctional quadratic_energy_sigma(const Mat& s, const Vec& w) {
  const Mat ss = symmetrized(s);
  MomentFunctional f;
  f.value = [ss, w](const Vec& z, const Mat& sigma) {
    return 0.5 * z.dot(ss * z) + w.dot(z) + 0.5 * (ss * sigma).trace();
  };
  f.grad_z = [ss, w](const Vec& z, const Mat&) { return (ss * z + w).eval(); };
  f.grad_mat = [ss](const Vec&, const Mat&) { return (0.5 * ss).eval(); };
  return f;
}

}  // namespace ehrenfest
