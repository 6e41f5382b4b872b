#include "ehrenfest/polynomial.hpp"

#include <algorithm>
#include <cmath>

namespace ehrenfest {

namespace {
constexpr double kDropTol = 0.0;  // exact algebra: drop only true zeros
}

Polynomial Polynomial::constant(double c) {
  Polynomial p;
  if (c != 0.0) p.terms_[{}] = c;
  return p;
}

Polynomial Polynomial::variable(VarId v) {
  Polynomial p;
  p.terms_[{v}] = 1.0;
  return p;
}

void Polynomial::prune() {
  for (auto it = terms_.begin(); it != terms_.end();)
    it = (std::abs(it->second) <= kDropTol) ? terms_.erase(it) : std::next(it);
}

Polynomial Polynomial::operator+(const Polynomial& o) const {
  Polynomial r(*this);
  r += o;
  return r;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [vars, c] : o.terms_) terms_[vars] += c;
  prune();
  return *this;
}

Polynomial Polynomial::operator-(const Polynomial& o) const { return *this + o * -1.0; }

Polynomial Polynomial::operator*(const Polynomial& o) const {
  Polynomial r;
  for (const auto& [va, ca] : terms_)
    for (const auto& [vb, cb] : o.terms_) {
      std::vector<VarId> vars;
      vars.reserve(va.size() + vb.size());
      std::merge(va.begin(), va.end(), vb.begin(), vb.end(), std::back_inserter(vars));
      r.terms_[vars] += ca * cb;
    }
  r.prune();
  return r;
}

Polynomial Polynomial::operator*(double s) const {
  Polynomial r;
  if (s == 0.0) return r;
  for (const auto& [vars, c] : terms_) r.terms_[vars] = c * s;
  return r;
}

Polynomial Polynomial::partial(VarId v) const {
  Polynomial r;
  for (const auto& [vars, c] : terms_) {
    const auto lo = std::lower_bound(vars.begin(), vars.end(), v);
    const auto hi = std::upper_bound(vars.begin(), vars.end(), v);
    const auto mult = static_cast<double>(hi - lo);
    if (mult == 0.0) continue;
    std::vector<VarId> rest(vars);
    rest.erase(std::lower_bound(rest.begin(), rest.end(), v));
    r.terms_[rest] += c * mult;
  }
  r.prune();
  return r;
}

double Polynomial::var_value(VarId v, const Vec& z, const Mat& m) {
  if (v & kMatFlag) {
    const int i = static_cast<int>((v & ~kMatFlag) >> 12);
    const int j = static_cast<int>(v & 0xFFFu);
    return m(i, j);
  }
  return z(static_cast<int>(v));
}

double Polynomial::eval(const Vec& z, const Mat& m) const {
  double acc = 0.0;
  for (const auto& [vars, c] : terms_) {
    double t = c;
    for (VarId v : vars) t *= var_value(v, z, m);
    acc += t;
  }
  return acc;
}

double Polynomial::eval(const Vec& zeta) const {
  static const Mat kEmpty;
  return eval(zeta, kEmpty);
}

Vec Polynomial::grad_z(const Vec& z, const Mat& m) const {
  Vec g = Vec::Zero(z.size());
  for (Index i = 0; i < z.size(); ++i) g(i) = partial(z_var(static_cast<int>(i))).eval(z, m);
  return g;
}

Mat Polynomial::grad_mat(const Vec& z, const Mat& m) const {
  const Index d = m.rows();
  Mat g = Mat::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i; j < d; ++j) {
      const double p = partial(m_var(static_cast<int>(i), static_cast<int>(j))).eval(z, m);
      if (i == j) {
        g(i, i) = p;
      } else {
        g(i, j) = g(j, i) = 0.5 * p;
      }
    }
  return g;
}

std::vector<Polynomial> Polynomial::sym_grad_z(Index dim) const {
  std::vector<Polynomial> g(dim);
  for (Index i = 0; i < dim; ++i) g[i] = partial(z_var(static_cast<int>(i)));
  return g;
}

std::vector<std::vector<Polynomial>> Polynomial::sym_grad_mat(Index dim) const {
  std::vector<std::vector<Polynomial>> g(dim, std::vector<Polynomial>(dim));
  for (Index i = 0; i < dim; ++i)
    for (Index j = i; j < dim; ++j) {
      Polynomial p = partial(m_var(static_cast<int>(i), static_cast<int>(j)));
      if (i == j) {
        g[i][i] = p;
      } else {
        g[i][j] = p * 0.5;
        g[j][i] = g[i][j];
      }
    }
  return g;
}

Polynomial random_polynomial(const std::vector<Polynomial::VarId>& vars, int max_degree,
                             int n_terms, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> coeff(-1.0, 1.0);
  std::uniform_int_distribution<int> deg(0, max_degree);
  std::uniform_int_distribution<std::size_t> pick(0, vars.size() - 1);
  Polynomial p;
  for (int t = 0; t < n_terms; ++t) {
    Polynomial mono = Polynomial::constant(coeff(rng));
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) mono = mono * Polynomial::variable(vars[pick(rng)]);
    p += mono;
  }
  return p;
}

std::vector<Polynomial::VarId> vector_vars(Index dim) {
  std::vector<Polynomial::VarId> v;
  for (Index i = 0; i < dim; ++i) v.push_back(Polynomial::z_var(static_cast<int>(i)));
  return v;
}

std::vector<Polynomial::VarId> matrix_vars(Index dim) {
  std::vector<Polynomial::VarId> v;
  for (Index i = 0; i < dim; ++i)
    for (Index j = i; j < dim; ++j) v.push_back(Polynomial::m_var(static_cast<int>(i), static_cast<int>(j)));
  return v;
}

std::vector<Polynomial::VarId> vector_and_matrix_vars(Index dim) {
  auto v = vector_vars(dim);
  const auto m = matrix_vars(dim);
  v.insert(v.end(), m.begin(), m.end());
  return v;
}

}  // namespace ehrenfest
