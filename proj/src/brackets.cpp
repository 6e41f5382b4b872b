#include "ehrenfest/brackets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ehrenfest/symplectic.hpp"

namespace ehrenfest {

namespace {

Vec fd_phase_grad(const std::function<double(const Vec&)>& f, const Vec& at, double h) {
  Vec g(at.size());
  Vec x = at;
  for (Index i = 0; i < at.size(); ++i) {
    x(i) = at(i) + h;
    const double fp = f(x);
    x(i) = at(i) - h;
    const double fm = f(x);
    x(i) = at(i);
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error("canonical_bracket: non-finite field evaluation");
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace

BracketReport canonical_bracket(const PhaseField& f, const PhaseField& g, const Vec& at) {
  BracketReport rep;
  Vec gf, gg;
  if (f.grad) {
    gf = f.grad(at);
  } else {
    gf = fd_phase_grad(f.value, at, f.fd_step);
    rep.finite_difference = true;
    rep.fd_step = f.fd_step;
  }
  if (g.grad) {
    gg = g.grad(at);
  } else {
    gg = fd_phase_grad(g.value, at, g.fd_step);
    rep.finite_difference = true;
    rep.fd_step = g.fd_step;
  }
  const Mat j = symplectic_form(at.size() / 2);
  rep.value = gf.dot(j * gg);
  return rep;
}

BracketReport moment_bracket(const MomentFunctional& f, const MomentFunctional& g, const Vec& z,
                             const Mat& x) {
  BracketReport rep;
  auto [fz, hf] = eval_grad_z(f, z, x);
  auto [fx, hf2] = eval_grad_mat(f, z, x);
  auto [gz, hg] = eval_grad_z(g, z, x);
  auto [gx, hg2] = eval_grad_mat(g, z, x);
  for (const auto& h : {hf, hf2, hg, hg2})
    if (h) {
      rep.finite_difference = true;
      rep.fd_step = *h;
    }
  const Mat j = symplectic_form(z.size() / 2);
  const Mat comm = fx * j * gx - gx * j * fx;
  rep.value = fz.dot(j * gz) + z.dot(fx * j * gz - gx * j * fz) + (x * comm).trace();
  if (!std::isfinite(rep.value))
    throw std::runtime_error("moment_bracket: non-finite bracket value");
  return rep;
}

BracketReport covariance_bracket(const MomentFunctional& f, const MomentFunctional& g,
                                 const Vec& z, const Mat& sigma) {
  BracketReport rep;
  auto [fz, hf] = eval_grad_z(f, z, sigma);
  auto [fs, hf2] = eval_grad_mat(f, z, sigma);
  auto [gz, hg] = eval_grad_z(g, z, sigma);
  auto [gs, hg2] = eval_grad_mat(g, z, sigma);
  for (const auto& h : {hf, hf2, hg, hg2})
    if (h) {
      rep.finite_difference = true;
      rep.fd_step = *h;
    }
  const Mat j = symplectic_form(z.size() / 2);
  rep.value = fz.dot(j * gz) + 2.0 * (sigma * (fs * j * gs - gs * j * fs)).trace();
  if (!std::isfinite(rep.value))
    throw std::runtime_error("covariance_bracket: non-finite bracket value");
  return rep;
}

// ---------------------------------------------------------------------------
// Casimirs

namespace {

// K = J ((X - zz/2) J)^{2j-1}; symmetric, and C_j = Tr[(MJ)^{2j}]/(2j) has
// dC = Tr[K dM] with M = X - zz/2, so C_X = K and C_z = -K z.
Mat casimir_kernel(int j, const Vec& z, const Mat& x) {
  const Mat m = x - 0.5 * z * z.transpose();
  const Mat jj = symplectic_form(z.size() / 2);
  Mat mj = m * jj;
  Mat pw = Mat::Identity(z.size(), z.size());
  for (int k = 0; k < 2 * j - 1; ++k) pw = pw * mj;
  return jj * pw;
}

void check_casimir_index(int j) {
  if (j < 1 || j > 3) throw std::invalid_argument("casimir index must be 1, 2 or 3");
}

}  // namespace

double casimir(int j, const Vec& z, const Mat& x) {
  check_casimir_index(j);
  const Mat m = x - 0.5 * z * z.transpose();
  const Mat jj = symplectic_form(z.size() / 2);
  const Mat mj = m * jj;
  Mat pw = Mat::Identity(z.size(), z.size());
  for (int k = 0; k < 2 * j; ++k) pw = pw * mj;
  return pw.trace() / (2.0 * j);
}

double casimir_det(const Vec& z, const Mat& x) {
  return (2.0 * x - z * z.transpose()).determinant();
}

MomentFunctional casimir_functional(int j) {
  check_casimir_index(j);
  MomentFunctional f;
  f.value = [j](const Vec& z, const Mat& x) { return casimir(j, z, x); };
  f.grad_mat = [j](const Vec& z, const Mat& x) { return casimir_kernel(j, z, x); };
  f.grad_z = [j](const Vec& z, const Mat& x) { return (-casimir_kernel(j, z, x) * z).eval(); };
  return f;
}

MomentFunctional casimir_det_functional() {
  MomentFunctional f;
  f.value = [](const Vec& z, const Mat& x) { return casimir_det(z, x); };
  f.grad_mat = [](const Vec& z, const Mat& x) {
    const Mat sigma = 2.0 * x - z * z.transpose();
    return (2.0 * sigma.determinant() * sigma.inverse()).eval();
  };
  f.grad_z = [](const Vec& z, const Mat& x) {
    const Mat sigma = 2.0 * x - z * z.transpose();
    return (-2.0 * sigma.determinant() * (sigma.inverse() * z)).eval();
  };
  return f;
}

MomentFunctional det_sigma_functional() {
  MomentFunctional f;
  f.value = [](const Vec&, const Mat& sigma) { return sigma.determinant(); };
  f.grad_mat = [](const Vec&, const Mat& sigma) {
    return (sigma.determinant() * sigma.inverse()).eval();
  };
  f.grad_z = [](const Vec& z, const Mat&) { return Vec::Zero(z.size()).eval(); };
  return f;
}

// ---------------------------------------------------------------------------
// Symbolic composition

namespace {

using PolyVec = std::vector<Polynomial>;
using PolyMat = std::vector<std::vector<Polynomial>>;

// (A J B)_{ij} for polynomial matrices and the numeric canonical form.
PolyMat poly_ajb(const PolyMat& a, const Mat& j, const PolyMat& b) {
  const Index d = j.rows();
  PolyMat r(d, PolyVec(d));
  for (Index i = 0; i < d; ++i)
    for (Index c = 0; c < d; ++c) {
      Polynomial acc;
      for (Index k = 0; k < d; ++k)
        for (Index l = 0; l < d; ++l)
          if (j(k, l) != 0.0) acc += a[i][k] * b[l][c] * j(k, l);
      r[i][c] = acc;
    }
  return r;
}

PolyVec poly_mjv(const PolyMat& a, const Mat& j, const PolyVec& v) {
  const Index d = j.rows();
  PolyVec r(d);
  for (Index i = 0; i < d; ++i) {
    Polynomial acc;
    for (Index k = 0; k < d; ++k)
      for (Index l = 0; l < d; ++l)
        if (j(k, l) != 0.0) acc += a[i][k] * v[l] * j(k, l);
    r[i] = acc;
  }
  return r;
}

}  // namespace

Polynomial poly_canonical_bracket(const Polynomial& f, const Polynomial& g, Index dim) {
  const Mat j = symplectic_form(dim / 2);
  const PolyVec fz = f.sym_grad_z(dim), gz = g.sym_grad_z(dim);
  Polynomial acc;
  for (Index a = 0; a < dim; ++a)
    for (Index b = 0; b < dim; ++b)
      if (j(a, b) != 0.0) acc += fz[a] * gz[b] * j(a, b);
  return acc;
}

Polynomial poly_moment_bracket(const Polynomial& f, const Polynomial& g, Index dim) {
  const Mat j = symplectic_form(dim / 2);
  const PolyVec fz = f.sym_grad_z(dim), gz = g.sym_grad_z(dim);
  const PolyMat fx = f.sym_grad_mat(dim), gx = g.sym_grad_mat(dim);

  Polynomial acc = poly_canonical_bracket(f, g, dim);

  const PolyVec t1 = poly_mjv(fx, j, gz), t2 = poly_mjv(gx, j, fz);
  for (Index i = 0; i < dim; ++i) {
    const Polynomial zi = Polynomial::variable(Polynomial::z_var(static_cast<int>(i)));
    acc += zi * (t1[i] - t2[i]);
  }

  const PolyMat c1 = poly_ajb(fx, j, gx), c2 = poly_ajb(gx, j, fx);
  for (Index i = 0; i < dim; ++i)
    for (Index k = 0; k < dim; ++k) {
      const Polynomial xik =
          Polynomial::variable(Polynomial::m_var(static_cast<int>(i), static_cast<int>(k)));
      acc += xik * (c1[k][i] - c2[k][i]);
    }
  return acc;
}

Polynomial poly_covariance_bracket(const Polynomial& f, const Polynomial& g, Index dim) {
  const Mat j = symplectic_form(dim / 2);
  Polynomial acc = poly_canonical_bracket(f, g, dim);
  const PolyMat fs = f.sym_grad_mat(dim), gs = g.sym_grad_mat(dim);
  const PolyMat c1 = poly_ajb(fs, j, gs), c2 = poly_ajb(gs, j, fs);
  for (Index i = 0; i < dim; ++i)
    for (Index k = 0; k < dim; ++k) {
      const Polynomial sik =
          Polynomial::variable(Polynomial::m_var(static_cast<int>(i), static_cast<int>(k)));
      acc += sik * (c1[k][i] - c2[k][i]) * 2.0;
    }
  return acc;
}

MomentPoint random_admissible_state(Index n, std::mt19937_64& rng, double min_nu) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MomentPoint pt;
  pt.z = Vec(2 * n);
  for (Index i = 0; i < 2 * n; ++i) pt.z(i) = u(rng);
  Mat a(2 * n, 2 * n);
  for (Index i = 0; i < 2 * n; ++i)
    for (Index k = 0; k < 2 * n; ++k) a(i, k) = 0.6 * u(rng);
  pt.sigma = a * a.transpose() + 0.3 * Mat::Identity(2 * n, 2 * n);
  const double nu = symplectic_eigenvalues(pt.sigma).front();
  if (nu < min_nu) pt.sigma *= min_nu / nu;
  pt.x = 0.5 * (pt.sigma + pt.z * pt.z.transpose());
  return pt;
}

// ---------------------------------------------------------------------------
// Axiom suite

namespace {

double default_step(BracketKind kind) {
  return kind == BracketKind::canonical ? 1e-4 : 1e-5;
}

std::string kind_name(BracketKind kind) {
  switch (kind) {
    case BracketKind::canonical: return "canonical";
    case BracketKind::moment: return "moment";
    case BracketKind::covariance: return "covariance";
  }
  return "?";
}

using StateFn = std::function<double(const Vec&, const Mat&)>;

MomentFunctional value_only(StateFn f, double h) {
  MomentFunctional r;
  r.value = std::move(f);
  r.fd_step = h;
  return r;
}

}  // namespace

double AxiomDefects::max_defect() const {
  double d = std::max({antisymmetry, leibniz, jacobi});
  if (casimir_commutation) d = std::max(d, *casimir_commutation);
  return d;
}

AxiomDefects bracket_axiom_suite(BracketKind kind, int samples, std::uint64_t seed,
                                 bool analytic_partials, double fd_step, Index dof) {
  if (samples < 1) throw std::invalid_argument("bracket_axiom_suite: samples must be >= 1");
  if (fd_step <= 0.0) fd_step = default_step(kind);
  const Index dim = 2 * dof;

  AxiomDefects out;
  out.bracket = kind_name(kind);
  out.method = analytic_partials ? "analytic" : "finite_difference";
  out.samples = samples;
  out.seed = seed;
  out.fd_step = analytic_partials ? 0.0 : fd_step;

  std::mt19937_64 rng(seed);
  const auto vars = (kind == BracketKind::canonical) ? vector_vars(dim) : vector_and_matrix_vars(dim);

  const bool has_matrix_slot = kind != BracketKind::canonical;
  double casimir_defect = 0.0;

  for (int s = 0; s < samples; ++s) {
    const Polynomial pf = random_polynomial(vars, 3, 5, rng);
    const Polynomial pg = random_polynomial(vars, 3, 5, rng);
    const Polynomial ph = random_polynomial(vars, 3, 5, rng);

    const MomentPoint pt = random_admissible_state(dof, rng);
    // canonical fields live on phase space; reuse z as the evaluation point
    const Vec& z = pt.z;
    const Mat m = (kind == BracketKind::covariance) ? pt.sigma : pt.x;

    auto bracket_of = [&](const Polynomial& a, const Polynomial& b) {
      switch (kind) {
        case BracketKind::canonical: return poly_canonical_bracket(a, b, dim);
        case BracketKind::moment: return poly_moment_bracket(a, b, dim);
        case BracketKind::covariance: return poly_covariance_bracket(a, b, dim);
      }
      return Polynomial();
    };

    if (analytic_partials) {
      const double fg = bracket_of(pf, pg).eval(z, m);
      const double gf = bracket_of(pg, pf).eval(z, m);
      out.antisymmetry = std::max(out.antisymmetry, std::abs(fg + gf));

      const double leib = bracket_of(pf * pg, ph).eval(z, m) -
                          bracket_of(pf, ph).eval(z, m) * pg.eval(z, m) -
                          pf.eval(z, m) * bracket_of(pg, ph).eval(z, m);
      out.leibniz = std::max(out.leibniz, std::abs(leib));

      const double jac = bracket_of(bracket_of(pf, pg), ph).eval(z, m) +
                         bracket_of(bracket_of(pg, ph), pf).eval(z, m) +
                         bracket_of(bracket_of(ph, pf), pg).eval(z, m);
      out.jacobi = std::max(out.jacobi, std::abs(jac));
    } else {
      if (kind == BracketKind::canonical) {
        auto field = [](const Polynomial& p, double h) {
          return PhaseField{[p](const Vec& zz) { return p.eval(zz); }, nullptr, h};
        };
        auto num_bracket = [&](const PhaseField& a, const PhaseField& b, const Vec& at) {
          return canonical_bracket(a, b, at).value;
        };
        const PhaseField ff = field(pf, fd_step), gg = field(pg, fd_step), hh = field(ph, fd_step);
        out.antisymmetry =
            std::max(out.antisymmetry, std::abs(num_bracket(ff, gg, z) + num_bracket(gg, ff, z)));

        PhaseField prod{[pf, pg](const Vec& zz) { return pf.eval(zz) * pg.eval(zz); }, nullptr,
                        fd_step};
        const double leib = num_bracket(prod, hh, z) - num_bracket(ff, hh, z) * pg.eval(z) -
                            pf.eval(z) * num_bracket(gg, hh, z);
        out.leibniz = std::max(out.leibniz, std::abs(leib));

        auto nested = [&](const PhaseField& a, const PhaseField& b) {
          return PhaseField{[a, b](const Vec& zz) { return canonical_bracket(a, b, zz).value; },
                            nullptr, fd_step};
        };
        const double jac = num_bracket(nested(ff, gg), hh, z) + num_bracket(nested(gg, hh), ff, z) +
                           num_bracket(nested(hh, ff), gg, z);
        out.jacobi = std::max(out.jacobi, std::abs(jac));
      } else {
        auto num_bracket = [&](const MomentFunctional& a, const MomentFunctional& b, const Vec& zz,
                               const Mat& mm) {
          return kind == BracketKind::moment ? moment_bracket(a, b, zz, mm).value
                                             : covariance_bracket(a, b, zz, mm).value;
        };
        auto fn = [](const Polynomial& p) {
          return [p](const Vec& zz, const Mat& mm) { return p.eval(zz, mm); };
        };
        const MomentFunctional ff = value_only(fn(pf), fd_step);
        const MomentFunctional gg = value_only(fn(pg), fd_step);
        const MomentFunctional hh = value_only(fn(ph), fd_step);

        out.antisymmetry = std::max(
            out.antisymmetry, std::abs(num_bracket(ff, gg, z, m) + num_bracket(gg, ff, z, m)));

        const MomentFunctional prod = value_only(
            [pf, pg](const Vec& zz, const Mat& mm) { return pf.eval(zz, mm) * pg.eval(zz, mm); },
            fd_step);
        const double leib = num_bracket(prod, hh, z, m) -
                            num_bracket(ff, hh, z, m) * pg.eval(z, m) -
                            pf.eval(z, m) * num_bracket(gg, hh, z, m);
        out.leibniz = std::max(out.leibniz, std::abs(leib));

        auto nested = [&](const MomentFunctional& a, const MomentFunctional& b) {
          return value_only(
              [a, b, num_bracket](const Vec& zz, const Mat& mm) { return num_bracket(a, b, zz, mm); },
              fd_step);
        };
        const double jac = num_bracket(nested(ff, gg), hh, z, m) +
                           num_bracket(nested(gg, hh), ff, z, m) +
                           num_bracket(nested(hh, ff), gg, z, m);
        out.jacobi = std::max(out.jacobi, std::abs(jac));
      }
    }

    // Casimir commutation: exact Casimir partials against the sampled observable.
    if (has_matrix_slot) {
      const MomentFunctional obs = analytic_partials
                                       ? from_polynomial(pf)
                                       : value_only([pf](const Vec& zz, const Mat& mm) {
                                             return pf.eval(zz, mm);
                                           }, fd_step);
      if (kind == BracketKind::moment) {
        for (int j = 1; j <= 3; ++j)
          casimir_defect = std::max(
              casimir_defect, std::abs(moment_bracket(casimir_functional(j), obs, z, m).value));
        casimir_defect = std::max(
            casimir_defect, std::abs(moment_bracket(casimir_det_functional(), obs, z, m).value));
      } else {
        casimir_defect = std::max(
            casimir_defect, std::abs(covariance_bracket(det_sigma_functional(), obs, z, m).value));
      }
    }
  }
  if (has_matrix_slot) out.casimir_commutation = casimir_defect;
  return out;
}

void write_axiom_reports_csv(const std::string& path, const std::vector<AxiomDefects>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "bracket,method,samples,seed,fd_step,antisymmetry,leibniz,jacobi,casimir_commutation\n";
  char buf[512];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%llu,%.17g,%.17g,%.17g,%.17g,", r.bracket.c_str(),
                  r.method.c_str(), r.samples, static_cast<unsigned long long>(r.seed), r.fd_step,
                  r.antisymmetry, r.leibniz, r.jacobi);
    out << buf;
    if (r.casimir_commutation) {
      std::snprintf(buf, sizeof(buf), "%.17g", *r.casimir_commutation);
      out << buf;
    }
    out << "\n";
  }
}

}  // namespace ehrenfest
