// Exact polynomial algebra over the entries of a phase-space vector and a
// symmetric matrix. Used to build random observables whose partial
// derivatives (and bracket compositions) are evaluated in closed form, so
// bracket-axiom defects can be driven down to roundoff.
//
// Variables: Z(i) is the i-th vector entry; M(i, j) with i <= j is the (i,j)
// entry of the symmetric matrix slot (X or Sigma depending on context).

#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "ehrenfest/eigen.hpp"

namespace ehrenfest {

class Polynomial {
 public:
  using VarId = std::uint32_t;
  static constexpr VarId kMatFlag = 0x80000000u;

  static VarId z_var(int i) { return static_cast<VarId>(i); }
  static VarId m_var(int i, int j) {
    if (i > j) std::swap(i, j);
    return kMatFlag | (static_cast<VarId>(i) << 12) | static_cast<VarId>(j);
  }

  Polynomial() = default;
  static Polynomial constant(double c);
  static Polynomial variable(VarId v);

  Polynomial operator+(const Polynomial& o) const;
  Polynomial operator-(const Polynomial& o) const;
  Polynomial operator*(const Polynomial& o) const;
  Polynomial operator*(double s) const;
  Polynomial& operator+=(const Polynomial& o);

  // d/d(var); matrix variables are treated as independent upper-triangle
  // entries here (the Tr-convention halving happens in grad_mat).
  Polynomial partial(VarId v) const;

  double eval(const Vec& z, const Mat& m) const;
  double eval(const Vec& zeta) const;  // vector-only variable set

  Vec grad_z(const Vec& z, const Mat& m) const;
  // Tr-convention symmetric gradient: off-diagonal entries are half the
  // partial with respect to the independent entry.
  Mat grad_mat(const Vec& z, const Mat& m) const;

  // Symbolic counterparts for bracket composition.
  std::vector<Polynomial> sym_grad_z(Index dim) const;
  std::vector<std::vector<Polynomial>> sym_grad_mat(Index dim) const;

  bool empty() const { return terms_.empty(); }
  std::size_t term_count() const { return terms_.size(); }

 private:
  // monomial: sorted variable list (with repetition) -> coefficient
  std::map<std::vector<VarId>, double> terms_;

  static double var_value(VarId v, const Vec& z, const Mat& m);
  void prune();
};

inline Polynomial operator*(double s, const Polynomial& p) { return p * s; }

// Random polynomial of total degree <= max_degree with coefficients in
// [-1, 1]; `vars` is the pool the monomials draw from.
Polynomial random_polynomial(const std::vector<Polynomial::VarId>& vars, int max_degree,
                             int n_terms, std::mt19937_64& rng);

// Variable pools.
std::vector<Polynomial::VarId> vector_vars(Index dim);
std::vector<Polynomial::VarId> matrix_vars(Index dim);
std::vector<Polynomial::VarId> vector_and_matrix_vars(Index dim);

}  // namespace ehrenfest
