// Poisson brackets on expectation-value functionals:
//
//   canonical   {f, g}_c        = grad f . J grad g            on phase space
//   moment      {F, G}(z, X)    = {F,G}_c + z.(F_X J G_z - G_X J F_z)
//                                 + Tr(X [F_X J G_X - G_X J F_X])
//   covariance  {f, g}(z, Sigma)= {f,g}_z + 2 Tr(Sigma (f_S J g_S - g_S J f_S))
//
// plus the Casimirs C_j = (1/2j) Tr[((X - zz/2) J)^{2j}], the determinant
// variant det(2X - zz), and a property-test suite (antisymmetry, Leibniz,
// Jacobi, Casimir commutation) over random polynomial observables. The suite
// runs either through finite-difference partials or through exact polynomial
// algebra; the latter pins defects at roundoff.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ehrenfest/eigen.hpp"
#include "ehrenfest/observable.hpp"
#include "ehrenfest/polynomial.hpp"

namespace ehrenfest {

struct BracketReport {
  double value = 0.0;
  bool finite_difference = false;
  std::optional<double> fd_step;  // set when finite_difference

  std::string method() const { return finite_difference ? "finite_difference" : "analytic"; }
};

// Scalar field on phase space with an optional analytic gradient.
struct PhaseField {
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;  // optional
  double fd_step = 1e-5;
};

BracketReport canonical_bracket(const PhaseField& f, const PhaseField& g, const Vec& at);
BracketReport moment_bracket(const MomentFunctional& f, const MomentFunctional& g, const Vec& z,
                             const Mat& x);
BracketReport covariance_bracket(const MomentFunctional& f, const MomentFunctional& g,
                                 const Vec& z, const Mat& sigma);

// C_j(z, X), j in {1,2,3}.
double casimir(int j, const Vec& z, const Mat& x);
// det(2X - zz), the expanded j=1 Casimir (equivalently det Sigma).
double casimir_det(const Vec& z, const Mat& x);

// The same invariants as observables with closed-form partials.
MomentFunctional casimir_functional(int j);
MomentFunctional casimir_det_functional();
// det Sigma as a (z, Sigma)-slot observable (Casimir of the covariance bracket).
MomentFunctional det_sigma_functional();

// Symbolic bracket composition; exact partials, exact products.
Polynomial poly_canonical_bracket(const Polynomial& f, const Polynomial& g, Index dim);
Polynomial poly_moment_bracket(const Polynomial& f, const Polynomial& g, Index dim);
Polynomial poly_covariance_bracket(const Polynomial& f, const Polynomial& g, Index dim);

// Random admissible moment state: Sigma positive definite with smallest
// symplectic eigenvalue >= min_nu, X = (Sigma + zz)/2.
struct MomentPoint {
  Vec z;
  Mat sigma;
  Mat x;
};
MomentPoint random_admissible_state(Index n, std::mt19937_64& rng, double min_nu = 0.55);

enum class BracketKind { canonical, moment, covariance };

struct AxiomDefects {
  std::string bracket;
  std::string method;  // finite_difference | analytic
  int samples = 0;
  std::uint64_t seed = 0;
  double fd_step = 0.0;  // 0 for analytic
  double antisymmetry = 0.0;
  double leibniz = 0.0;
  double jacobi = 0.0;
  std::optional<double> casimir_commutation;  // moment / covariance only
  double max_defect() const;
};

// Antisymmetry, Leibniz, Jacobi (cyclic sum) and Casimir-commutation defects
// over `samples` random degree-<=3 polynomial observables at random
// admissible states. Defaults: fd_step 1e-4 for the canonical bracket,
// 1e-5 otherwise (ignored in analytic mode).
AxiomDefects bracket_axiom_suite(BracketKind kind, int samples, std::uint64_t seed,
                                 bool analytic_partials, double fd_step = 0.0, Index dof = 1);

void write_axiom_reports_csv(const std::string& path, const std::vector<AxiomDefects>& rows);

}  // namespace ehrenfest
