// Scalar functionals of a moment state (z, M), where the matrix slot M is the
// second moment X or the covariance Sigma depending on which bracket the
// observable is handed to. Partial derivatives follow the trace convention
// df = Tr(f_M dM) with dM symmetric, so the returned matrix gradient is
// symmetric with halved off-diagonal entries.

#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "ehrenfest/eigen.hpp"
#include "ehrenfest/polynomial.hpp"

namespace ehrenfest {

struct MomentFunctional {
  std::function<double(const Vec&, const Mat&)> value;
  std::function<Vec(const Vec&, const Mat&)> grad_z;   // optional
  std::function<Mat(const Vec&, const Mat&)> grad_mat; // optional, symmetric
  double fd_step = 1e-5;

  bool analytic() const { return static_cast<bool>(grad_z) && static_cast<bool>(grad_mat); }
};

using MomentObservable = MomentFunctional;

// Central finite differences, step h; the matrix direction perturbs the
// upper triangle and mirrors it, consistent with the trace convention.
Vec fd_grad_z(const std::function<double(const Vec&, const Mat&)>& f, const Vec& z,
              const Mat& m, double h);
Mat fd_grad_mat(const std::function<double(const Vec&, const Mat&)>& f, const Vec& z,
                const Mat& m, double h);

// Uses analytic partials when present, finite differences otherwise; the
// second member reports the fd step actually used (nullopt for analytic).
std::pair<Vec, std::optional<double>> eval_grad_z(const MomentFunctional& f, const Vec& z,
                                                  const Mat& m);
std::pair<Mat, std::optional<double>> eval_grad_mat(const MomentFunctional& f, const Vec& z,
                                                    const Mat& m);

MomentFunctional from_polynomial(const Polynomial& p);

// F(z, M) = M_{ij} as an observable (coordinate projection).
MomentFunctional matrix_entry_observable(int i, int j);
MomentFunctional vector_entry_observable(int i);

// h(z, M) = z . S z / 2 + w . z + Tr(S M) * (X slot) -- energy of the
// quadratic Hamiltonian H = zeta . S zeta / 2 + w . zeta in moment form.
MomentFunctional quadratic_energy_x(const Mat& s, const Vec& w);
// Same energy as a function of (z, Sigma): z . S z / 2 + w . z + Tr(S Sigma) / 2.
MomentFunctional quadratic_energy_sigma(const Mat& s, const Vec& w);

}  // namespace ehrenfest
