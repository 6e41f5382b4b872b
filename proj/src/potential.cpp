#include "ehrenfest/potential.hpp"

#include <algorithm>
#include <cmath>

namespace ehrenfest {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

Potential Potential::harmonic(double k) {
  Potential p(Kind::harmonic, 5);
  p.a_ = k;
  return p;
}

Potential Potential::quartic(double lambda) {
  Potential p(Kind::quartic, 5);
  p.a_ = lambda;
  return p;
}

Potential Potential::morse(double well_depth, double width) {
  Potential p(Kind::morse, 5);
  p.a_ = well_depth;
  p.b_ = width;
  return p;
}

Potential Potential::step(double mu) {
  Potential p(Kind::step, 0);
  p.a_ = mu;
  return p;
}

Potential Potential::polynomial(std::vector<double> coeffs) {
  Potential p(Kind::polynomial, 5);
  p.coeffs_ = std::move(coeffs);
  return p;
}

Potential Potential::tabulated(std::vector<double> q, std::vector<double> v) {
  if (q.size() != v.size() || q.size() < 3)
    throw PotentialError("tabulated potential needs >= 3 matching samples");
  if (!std::is_sorted(q.begin(), q.end()))
    throw PotentialError("tabulated potential needs strictly increasing abscissae");
  Potential p(Kind::tabulated, 1);
  p.knots_ = std::move(q);
  p.vals_ = std::move(v);
  // natural cubic spline: solve the tridiagonal system for second derivatives
  const int n = static_cast<int>(p.knots_.size());
  std::vector<double> h(n - 1), alpha(n, 0.0), l(n), mu(n), zz(n);
  for (int i = 0; i < n - 1; ++i) h[i] = p.knots_[i + 1] - p.knots_[i];
  for (int i = 1; i < n - 1; ++i)
    alpha[i] = 6.0 * ((p.vals_[i + 1] - p.vals_[i]) / h[i] - (p.vals_[i] - p.vals_[i - 1]) / h[i - 1]);
  l[0] = 1.0;
  mu[0] = zz[0] = 0.0;
  for (int i = 1; i < n - 1; ++i) {
    l[i] = 2.0 * (p.knots_[i + 1] - p.knots_[i - 1]) - h[i - 1] * mu[i - 1];
    mu[i] = h[i] / l[i];
    zz[i] = (alpha[i] - h[i - 1] * zz[i - 1]) / l[i];
  }
  p.m2_.assign(n, 0.0);
  for (int i = n - 2; i >= 1; --i) p.m2_[i] = zz[i] - mu[i] * p.m2_[i + 1];
  return p;
}

Potential Potential::with_derivative_order(int order) const {
  if (order < 0) throw PotentialError("derivative order must be >= 0");
  if (kind_ == Kind::step && order > 0)
    throw PotentialError("step potential has no pointwise derivatives above order 0");
  if (kind_ == Kind::tabulated && order > 1)
    throw PotentialError("tabulated potential supports derivatives up to order 1");
  Potential p(*this);
  p.order_ = order;
  return p;
}

double Potential::derivative(int k, double q) const {
  if (k < 0) throw PotentialError("derivative order must be >= 0");
  if (!std::isfinite(q)) throw PotentialError("potential evaluated at non-finite q");
  if (kind_ == Kind::step && k >= 1)
    throw PotentialError("step potential: pointwise derivatives of Theta are not available");
  if (k > order_)
    throw PotentialError("derivative order " + std::to_string(k) + " exceeds available order " +
                         std::to_string(order_));

  switch (kind_) {
    case Kind::harmonic:  // V = k q^2 / 2
      if (k == 0) return 0.5 * a_ * q * q;
      if (k == 1) return a_ * q;
      if (k == 2) return a_;
      return 0.0;
    case Kind::quartic:  // V = lambda q^4 / 4
      switch (k) {
        case 0: return 0.25 * a_ * q * q * q * q;
        case 1: return a_ * q * q * q;
        case 2: return 3.0 * a_ * q * q;
        case 3: return 6.0 * a_ * q;
        case 4: return 6.0 * a_;
        default: return 0.0;
      }
    case Kind::morse: {  // V = D (1 - e^{-a q})^2
      const double e1 = std::exp(-b_ * q);
      if (k == 0) {
        const double s = 1.0 - e1;
        return a_ * s * s;
      }
      // V^{(k)} = D [ -2 (-a)^k e^{-aq} + (-2a)^k e^{-2aq} ],  k >= 1
      const double ma = -b_;
      return a_ * (-2.0 * std::pow(ma, k) * e1 + std::pow(2.0 * ma, k) * e1 * e1);
    }
    case Kind::step:  // mu Theta(q); Theta(0) = 1/2
      return a_ * (q > 0.0 ? 1.0 : (q < 0.0 ? 0.0 : 0.5));
    case Kind::polynomial: {
      // V^{(k)} = sum_{i >= k} c_i i!/(i-k)! q^{i-k}, evaluated by Horner
      const int m = static_cast<int>(coeffs_.size()) - 1;
      if (k > m) return 0.0;
      double acc = 0.0;
      for (int i = m; i >= k; --i) {
        double f = coeffs_[i];
        for (int j = 0; j < k; ++j) f *= static_cast<double>(i - j);
        acc = acc * q + f;
      }
      return acc;
    }
    case Kind::tabulated:
      return spline_eval(k, q);
  }
  throw PotentialError("unreachable potential kind");
}

double Potential::spline_eval(int k, double q) const {
  const int n = static_cast<int>(knots_.size());
  // clamp to the end intervals (linear extrapolation of the end cubic)
  int i = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), q) - knots_.begin()) - 1;
  i = std::clamp(i, 0, n - 2);
  const double h = knots_[i + 1] - knots_[i];
  const double xa = knots_[i + 1] - q, xb = q - knots_[i];
  if (k == 0) {
    return (m2_[i] * xa * xa * xa + m2_[i + 1] * xb * xb * xb) / (6.0 * h) +
           (vals_[i] / h - m2_[i] * h / 6.0) * xa + (vals_[i + 1] / h - m2_[i + 1] * h / 6.0) * xb;
  }
  return (-m2_[i] * xa * xa + m2_[i + 1] * xb * xb) / (2.0 * h) -
         (vals_[i] / h - m2_[i] * h / 6.0) + (vals_[i + 1] / h - m2_[i + 1] * h / 6.0);
}

double Potential::step_mu() const {
  if (kind_ != Kind::step) throw PotentialError("step_mu: not a step potential");
  return a_;
}

double Potential::smeared_step(double q, double var) const {
  if (kind_ != Kind::step) throw PotentialError("smeared_step: not a step potential");
  if (var <= 0.0) return value(q);
  return a_ * normal_cdf(q / std::sqrt(var));
}

double Potential::smeared_step_dq(double q, double var) const {
  if (kind_ != Kind::step) throw PotentialError("smeared_step_dq: not a step potential");
  if (var <= 0.0) throw PotentialError("smeared_step_dq: variance must be positive");
  const double s = std::sqrt(var);
  return a_ * normal_pdf(q / s) / s;
}

double Potential::smeared_step_dvar(double q, double var) const {
  if (kind_ != Kind::step) throw PotentialError("smeared_step_dvar: not a step potential");
  if (var <= 0.0) throw PotentialError("smeared_step_dvar: variance must be positive");
  const double s = std::sqrt(var);
  return -0.5 * a_ * q * normal_pdf(q / s) / (var * s);
}

std::string Potential::describe() const {
  switch (kind_) {
    case Kind::harmonic: return "harmonic(k=" + std::to_string(a_) + ")";
    case Kind::quartic: return "quartic(lambda=" + std::to_string(a_) + ")";
    case Kind::morse: return "morse(D=" + std::to_string(a_) + ", a=" + std::to_string(b_) + ")";
    case Kind::step: return "step(mu=" + std::to_string(a_) + ")";
    case Kind::polynomial: return "polynomial(degree=" + std::to_string(coeffs_.empty() ? 0 : coeffs_.size() - 1) + ")";
    case Kind::tabulated: return "tabulated(" + std::to_string(knots_.size()) + " samples)";
  }
  return "?";
}

}  // namespace ehrenfest
