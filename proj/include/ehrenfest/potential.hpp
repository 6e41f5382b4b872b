// One-dimensional potentials with analytic derivatives up to a declared
// order. The step potential exposes only its pointwise value and its
// Gaussian-smeared expectation; tabulated data is interpolated by a natural
// cubic spline (value and first derivative).

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ehrenfest {

struct PotentialError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Potential {
 public:
  enum class Kind { harmonic, quartic, morse, step, polynomial, tabulated };

  static Potential harmonic(double k);
  static Potential quartic(double lambda);
  static Potential morse(double well_depth, double width);
  static Potential step(double mu);
  static Potential polynomial(std::vector<double> coeffs);  // V = sum c_i q^i
  static Potential tabulated(std::vector<double> q, std::vector<double> v);

  Kind kind() const { return kind_; }
  int derivative_order() const { return order_; }

  // Raises or lowers the declared derivative capability (step and tabulated
  // kinds cannot be raised past what they support).
  Potential with_derivative_order(int order) const;

  double value(double q) const { return derivative(0, q); }

  // V^{(k)}(q), analytic for the built-in kinds. Throws PotentialError when
  // k exceeds derivative_order(), or k >= 1 for the step kind.
  double derivative(int k, double q) const;

  // Step kind only: <mu Theta(q + qt)> over qt ~ N(0, var) and its partials.
  double step_mu() const;
  double smeared_step(double q, double var) const;         // mu * Phi(q / sqrt(var))
  double smeared_step_dq(double q, double var) const;      // d/dq
  double smeared_step_dvar(double q, double var) const;    // d/dvar

  std::string describe() const;

 private:
  Potential(Kind kind, int order) : kind_(kind), order_(order) {}

  Kind kind_;
  int order_;
  double a_ = 0.0, b_ = 0.0;     // kind parameters
  std::vector<double> coeffs_;   // polynomial
  // tabulated: natural cubic spline knots/values/second derivatives
  std::vector<double> knots_, vals_, m2_;

  double spline_eval(int k, double q) const;
};

}  // namespace ehrenfest
