#include "ehrenfest/wigner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "ehrenfest/symplectic.hpp"

namespace ehrenfest {

namespace {

constexpr double kPi = 3.14159265358979323846;

Vec linspace(double lo, double hi, Index n) {
  Vec v(n);
  const double d = (hi - lo) / static_cast<double>(n - 1);
  for (Index i = 0; i < n; ++i) v(i) = lo + static_cast<double>(i) * d;
  v(n - 1) = hi;
  return v;
}

// snap near-integer sample coordinates so exact node hits stay exact
double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : x;
}

}  // namespace

Domain default_domain(const Vec2& z, const Mat2& sigma, double hbar, double k_std) {
  const double sq = std::sqrt(hbar * sigma(0, 0));
  const double sp = std::sqrt(hbar * sigma(1, 1));
  return {z(0) - k_std * sq, z(0) + k_std * sq, z(1) - k_std * sp, z(1) + k_std * sp};
}

WignerGrid make_grid(const Domain& dom, Index nq, Index np, Frame frame, double hbar) {
  if (nq < 7 || np < 7) throw GridError("grid too coarse for 4th-order stencils (need >= 7 points per axis)");
  if (!(dom.qmax > dom.qmin) || !(dom.pmax > dom.pmin))
    throw GridError("grid domain is empty");
  WignerGrid g;
  g.q_axis = linspace(dom.qmin, dom.qmax, nq);
  g.p_axis = linspace(dom.pmin, dom.pmax, np);
  g.dq = (dom.qmax - dom.qmin) / static_cast<double>(nq - 1);
  g.dp = (dom.pmax - dom.pmin) / static_cast<double>(np - 1);
  g.values = Grid2D::Zero(nq, np);
  g.frame = frame;
  g.hbar = hbar;
  return g;
}

WignerGrid gaussian_init(const Vec2& z, const Mat2& sigma, double hbar, const Domain& dom,
                         Index nq, Index np, Frame frame) {
  Eigen::SelfAdjointEigenSolver<Mat2> es(sigma);
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw std::invalid_argument("gaussian_init: Sigma must be positive definite");
  const double sq = 6.0 * std::sqrt(hbar * sigma(0, 0));
  const double sp = 6.0 * std::sqrt(hbar * sigma(1, 1));
  if (z(0) - sq < dom.qmin || z(0) + sq > dom.qmax || z(1) - sp < dom.pmin || z(1) + sp > dom.pmax)
    throw GridError("gaussian_init: domain too small (must contain z +- 6 sigma)");

  WignerGrid g = make_grid(dom, nq, np, frame, hbar);
  const Mat2 prec = sigma.inverse() / hbar;
  const double norm = 1.0 / (2.0 * kPi * hbar * std::sqrt(sigma.determinant()));
  for (Index i = 0; i < nq; ++i) {
    const double dqv = g.q_axis(i) - z(0);
    for (Index j = 0; j < np; ++j) {
      const double dpv = g.p_axis(j) - z(1);
      const double quad = prec(0, 0) * dqv * dqv + 2.0 * prec(0, 1) * dqv * dpv + prec(1, 1) * dpv * dpv;
      g.values(i, j) = norm * std::exp(-0.5 * quad);
    }
  }
  if (boundary_mass_fraction(g) > 1e-8)
    throw GridError("gaussian_init: domain too small (boundary mass above 1e-8)");
  return g;
}

double quadrature(const WignerGrid& g, const Grid2D& f) {
  const Index nq = f.rows(), np = f.cols();
  double s = f.sum();
  s -= 0.5 * (f.row(0).sum() + f.row(nq - 1).sum() + f.col(0).sum() + f.col(np - 1).sum());
  s += 0.25 * (f(0, 0) + f(0, np - 1) + f(nq - 1, 0) + f(nq - 1, np - 1));
  return s * g.dq * g.dp;
}

GridMoments grid_moments(const WignerGrid& g) {
  GridMoments m;
  m.mass = quadrature(g, g.values);
  Grid2D tmp(g.nq(), g.np());
  const auto qcol = g.q_axis.array();
  const auto prow = g.p_axis.transpose().array();

  tmp = g.values.colwise() * qcol;
  m.mean(0) = quadrature(g, tmp);
  const Grid2D wp = g.values.rowwise() * prow;
  m.mean(1) = quadrature(g, wp);

  tmp = (g.values.colwise() * qcol).colwise() * qcol;
  m.second(0, 0) = 0.5 * quadrature(g, tmp);
  tmp = wp.colwise() * qcol;
  m.second(0, 1) = 0.5 * quadrature(g, tmp);
  m.second(1, 0) = m.second(0, 1);
  tmp = wp.rowwise() * prow;
  m.second(1, 1) = 0.5 * quadrature(g, tmp);
  return m;
}

double boundary_mass_fraction(const WignerGrid& g) {
  const Index nq = g.nq(), np = g.np();
  Grid2D ring = Grid2D::Zero(nq, np);
  ring.topRows(2) = g.values.topRows(2).abs();
  ring.bottomRows(2) = g.values.bottomRows(2).abs();
  ring.leftCols(2) = g.values.leftCols(2).abs();
  ring.rightCols(2) = g.values.rightCols(2).abs();
  const double total = quadrature(g, g.values.abs().eval());
  if (total <= 0.0) return 0.0;
  return quadrature(g, ring) / total;
}

// ---------------------------------------------------------------------------
// Stencils

Grid2D deriv_q(const Grid2D& w, double dq) {
  const Index n = w.rows(), m = w.cols();
  if (n < 7) throw GridError("deriv_q: fewer than 7 points along q");
  Grid2D d(n, m);
  const double c = 1.0 / (12.0 * dq);
  d.middleRows(2, n - 4) = c * (w.topRows(n - 4) - 8.0 * w.middleRows(1, n - 4) +
                                8.0 * w.middleRows(3, n - 4) - w.middleRows(4, n - 4));
  d.row(0) = c * (-25.0 * w.row(0) + 48.0 * w.row(1) - 36.0 * w.row(2) + 16.0 * w.row(3) -
                  3.0 * w.row(4));
  d.row(1) = c * (-3.0 * w.row(0) - 10.0 * w.row(1) + 18.0 * w.row(2) - 6.0 * w.row(3) + w.row(4));
  d.row(n - 2) = c * (3.0 * w.row(n - 1) + 10.0 * w.row(n - 2) - 18.0 * w.row(n - 3) +
                      6.0 * w.row(n - 4) - w.row(n - 5));
  d.row(n - 1) = c * (25.0 * w.row(n - 1) - 48.0 * w.row(n - 2) + 36.0 * w.row(n - 3) -
                      16.0 * w.row(n - 4) + 3.0 * w.row(n - 5));
  return d;
}

Grid2D deriv_p(const Grid2D& w, double dp) {
  const Index n = w.rows(), m = w.cols();
  if (m < 7) throw GridError("deriv_p: fewer than 7 points along p");
  Grid2D d(n, m);
  const double c = 1.0 / (12.0 * dp);
  d.middleCols(2, m - 4) = c * (w.leftCols(m - 4) - 8.0 * w.middleCols(1, m - 4) +
                                8.0 * w.middleCols(3, m - 4) - w.middleCols(4, m - 4));
  d.col(0) = c * (-25.0 * w.col(0) + 48.0 * w.col(1) - 36.0 * w.col(2) + 16.0 * w.col(3) -
                  3.0 * w.col(4));
  d.col(1) = c * (-3.0 * w.col(0) - 10.0 * w.col(1) + 18.0 * w.col(2) - 6.0 * w.col(3) + w.col(4));
  d.col(m - 2) = c * (3.0 * w.col(m - 1) + 10.0 * w.col(m - 2) - 18.0 * w.col(m - 3) +
                      6.0 * w.col(m - 4) - w.col(m - 5));
  d.col(m - 1) = c * (25.0 * w.col(m - 1) - 48.0 * w.col(m - 2) + 36.0 * w.col(m - 3) -
                      16.0 * w.col(m - 4) + 3.0 * w.col(m - 5));
  return d;
}

namespace {

// {{f, g}} from precomputed first derivatives of both arguments.
Grid2D bracket_from_derivs(const Grid2D& fq, const Grid2D& fp, const Grid2D& gq, const Grid2D& gp,
                           const WignerGrid& geom, MoyalOrder order) {
  Grid2D out = fq * gp - fp * gq;
  if (order == MoyalOrder::hbar2) {
    const Grid2D fqq = deriv_q(fq, geom.dq), fqp = deriv_p(fq, geom.dp), fpp = deriv_p(fp, geom.dp);
    const Grid2D gqq = deriv_q(gq, geom.dq), gqp = deriv_p(gq, geom.dp), gpp = deriv_p(gp, geom.dp);
    const Grid2D fqqq = deriv_q(fqq, geom.dq), fqqp = deriv_p(fqq, geom.dp),
                 fqpp = deriv_p(fqp, geom.dp), fppp = deriv_p(fpp, geom.dp);
    const Grid2D gqqq = deriv_q(gqq, geom.dq), gqqp = deriv_p(gqq, geom.dp),
                 gqpp = deriv_p(gqp, geom.dp), gppp = deriv_p(gpp, geom.dp);
    const double h2 = geom.hbar * geom.hbar / 24.0;
    out -= h2 * (fqqq * gppp - 3.0 * fqqp * gqpp + 3.0 * fqpp * gqqp - fppp * gqqq);
  }
  return out;
}

}  // namespace

Grid2D moyal_bracket(const Grid2D& f, const Grid2D& g, const WignerGrid& geom, MoyalOrder order) {
  return bracket_from_derivs(deriv_q(f, geom.dq), deriv_p(f, geom.dp), deriv_q(g, geom.dq),
                             deriv_p(g, geom.dp), geom, order);
}

Grid2D moyal_rhs(const Grid2D& h_field, const WignerGrid& grid, MoyalOrder order) {
  return moyal_bracket(h_field, grid.values, grid, order);
}

double moyal_permutation_defect(const Grid2D& a, const Grid2D& b, const Grid2D& c,
                                const WignerGrid& geom, MoyalOrder order) {
  const double lhs = quadrature(geom, (a * moyal_bracket(b, c, geom, order)).eval());
  const double rhs = quadrature(geom, (c * moyal_bracket(a, b, geom, order)).eval());
  return std::abs(lhs - rhs);
}

// ---------------------------------------------------------------------------
// Co-moving frame

namespace {

Grid2D sample_field(const WignerGrid& g, const ComovingHamiltonian& ham, const Vec2& z) {
  Grid2D h(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) h(i, j) = ham.field(z, g.q_axis(i), g.p_axis(j));
  return h;
}

}  // namespace

ComovingRhs comoving_rhs(const ComovingState& state, const ComovingHamiltonian& ham,
                         MoyalOrder order) {
  const WignerGrid& g = state.grid;
  const Grid2D& w = g.values;
  const Grid2D h = sample_field(g, ham, state.z);
  const double mass = quadrature(g, w);

  const Grid2D hq = deriv_q(h, g.dq), hp = deriv_p(h, g.dp);
  const Grid2D wq = deriv_q(w, g.dq), wp = deriv_p(w, g.dp);

  ComovingRhs r;
  r.dw = bracket_from_derivs(hq, hp, wq, wp, g, order);

  // nonlocal counter-term: v = <{zeta~, H~}> / mass keeps <zeta~> pinned
  const Vec2 v(quadrature(g, (w * hp).eval()) / mass, -quadrature(g, (w * hq).eval()) / mass);
  r.dw += v(0) * wq + v(1) * wp;

  Vec2 grad;
  if (ham.grad_z) {
    Grid2D g1(g.nq(), g.np()), g2(g.nq(), g.np());
    for (Index i = 0; i < g.nq(); ++i)
      for (Index j = 0; j < g.np(); ++j) {
        const Vec2 gz = ham.grad_z(state.z, g.q_axis(i), g.p_axis(j));
        g1(i, j) = gz(0);
        g2(i, j) = gz(1);
      }
    grad << quadrature(g, (w * g1).eval()) / mass, quadrature(g, (w * g2).eval()) / mass;
  } else {
    const double step = ham.fd_step_z;
    for (int k = 0; k < 2; ++k) {
      Vec2 zp = state.z, zm = state.z;
      zp(k) += step;
      zm(k) -= step;
      const double ep = quadrature(g, (w * sample_field(g, ham, zp)).eval()) / mass;
      const double em = quadrature(g, (w * sample_field(g, ham, zm)).eval()) / mass;
      grad(k) = (ep - em) / (2.0 * step);
    }
  }
  Mat2 j2;
  j2 << 0.0, 1.0, -1.0, 0.0;
  r.dz = j2 * grad;
  return r;
}

double comoving_energy(const ComovingState& state, const ComovingHamiltonian& ham) {
  const Grid2D h = sample_field(state.grid, ham, state.z);
  return quadrature(state.grid, (state.grid.values * h).eval()) /
         quadrature(state.grid, state.grid.values);
}

double sharp_marginal(const WignerGrid& g, double qstar) {
  const Index nq = g.nq(), np = g.np();
  if (qstar < g.q_axis(0) || qstar > g.q_axis(nq - 1))
    throw GridError("sharp_marginal: point outside the grid");
  double fi = snap((qstar - g.q_axis(0)) / g.dq);
  Index i0 = static_cast<Index>(std::floor(fi));
  if (i0 >= nq - 1) i0 = nq - 2;
  const double frac = fi - static_cast<double>(i0);

  auto row_integral = [&](Index i) {
    double s = g.values.row(i).sum() - 0.5 * (g.values(i, 0) + g.values(i, np - 1));
    return s * g.dp;
  };
  return (1.0 - frac) * row_integral(i0) + frac * row_integral(i0 + 1);
}

ComovingRhs step_potential_rhs(double mu, const ComovingState& state, MoyalOrder order,
                               double smoothing_cells) {
  const WignerGrid& g = state.grid;
  const double q = state.z(0), p = state.z(1);
  const double qstar = -q;
  if (qstar < g.q_axis(0) + 2.0 * g.dq || qstar > g.q_axis(g.nq() - 1) - 2.0 * g.dq)
    throw GridError("step_potential_rhs: -q outside the grid interior");

  const Grid2D& w = g.values;
  const double mass = quadrature(g, w);
  const double width = smoothing_cells * g.dq;

  // transport field: p~^2/2 + mu Theta_w(q + q~); the p p~ cross term of the
  // full H~ cancels against the counter-term and is folded out analytically
  Grid2D h(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i) {
    const double theta = 0.5 * (1.0 + std::erf((q + g.q_axis(i)) / (std::sqrt(2.0) * width)));
    for (Index j = 0; j < g.np(); ++j) h(i, j) = 0.5 * g.p_axis(j) * g.p_axis(j) + mu * theta;
  }

  const Grid2D hq = deriv_q(h, g.dq), hp = deriv_p(h, g.dp);
  const Grid2D wq = deriv_q(w, g.dq), wp = deriv_p(w, g.dp);

  ComovingRhs r;
  r.dw = bracket_from_derivs(hq, hp, wq, wp, g, order);
  const Vec2 v(quadrature(g, (w * hp).eval()) / mass, -quadrature(g, (w * hq).eval()) / mass);
  r.dw += v(0) * wq + v(1) * wp;

  // mean equation keeps the sharp marginal force
  r.dz << p, -mu * sharp_marginal(g, qstar);
  return r;
}

Grid2D absorbing_mask(const WignerGrid& g, int width_cells, double strength) {
  const Index nq = g.nq(), np = g.np();
  Grid2D mask = Grid2D::Zero(nq, np);
  if (width_cells <= 0 || strength <= 0.0) return mask;
  auto ramp = [&](Index i, Index n) {
    const Index d = std::min(i, n - 1 - i);
    if (d >= width_cells) return 0.0;
    const double x = 1.0 - static_cast<double>(d) / static_cast<double>(width_cells);
    return x * x;
  };
  for (Index i = 0; i < nq; ++i)
    for (Index j = 0; j < np; ++j)
      mask(i, j) = strength * std::max(ramp(i, nq), ramp(j, np));
  return mask;
}

// ---------------------------------------------------------------------------
// Group action

GroupElement make_group_element(const Mat2& s, const Vec2& shift, double phase) {
  if (symplectic_defect(s) >= 1e-10)
    throw std::invalid_argument("group element: matrix is not symplectic");
  return GroupElement{s, shift, phase};
}

WignerGrid group_action(const GroupElement& g, const WignerGrid& grid, double clip_tol) {
  WignerGrid out = grid;
  const Index nq = grid.nq(), np = grid.np();
  const double q0 = grid.q_axis(0), p0 = grid.p_axis(0);
  for (Index i = 0; i < nq; ++i) {
    for (Index j = 0; j < np; ++j) {
      const double qs = g.s(0, 0) * grid.q_axis(i) + g.s(0, 1) * grid.p_axis(j) + g.shift(0);
      const double ps = g.s(1, 0) * grid.q_axis(i) + g.s(1, 1) * grid.p_axis(j) + g.shift(1);
      const double fi = snap((qs - q0) / grid.dq);
      const double fj = snap((ps - p0) / grid.dp);
      if (fi < 0.0 || fj < 0.0 || fi > static_cast<double>(nq - 1) ||
          fj > static_cast<double>(np - 1)) {
        out.values(i, j) = 0.0;
        continue;
      }
      Index i0 = static_cast<Index>(std::floor(fi));
      Index j0 = static_cast<Index>(std::floor(fj));
      if (i0 >= nq - 1) i0 = nq - 2;
      if (j0 >= np - 1) j0 = np - 2;
      const double a = fi - static_cast<double>(i0), b = fj - static_cast<double>(j0);
      out.values(i, j) = (1.0 - a) * (1.0 - b) * grid.values(i0, j0) +
                         a * (1.0 - b) * grid.values(i0 + 1, j0) +
                         (1.0 - a) * b * grid.values(i0, j0 + 1) +
                         a * b * grid.values(i0 + 1, j0 + 1);
    }
  }
  const double m0 = quadrature(grid, grid.values);
  const double m1 = quadrature(out, out.values);
  if (std::abs(m1 - m0) > clip_tol)
    throw GridError("group_action: transformed support clipped (mass change " +
                    std::to_string(m1 - m0) + ")");
  return out;
}

// ---------------------------------------------------------------------------
// Snapshots

void write_grid_csv(const std::string& path, const WignerGrid& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "q,p,w\n";
  char buf[128];
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", g.q_axis(i), g.p_axis(j),
                    g.values(i, j));
      out << buf;
    }
}

void write_grid_binary(const std::string& path, const WignerGrid& g) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%lld %lld %.17g %.17g %.17g %.17g\n",
                static_cast<long long>(g.nq()), static_cast<long long>(g.np()), g.q_axis(0),
                g.q_axis(g.nq() - 1), g.p_axis(0), g.p_axis(g.np() - 1));
  out << buf;
  std::vector<double> row(static_cast<std::size_t>(g.np()));
  for (Index i = 0; i < g.nq(); ++i) {
    for (Index j = 0; j < g.np(); ++j) row[static_cast<std::size_t>(j)] = g.values(i, j);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

WignerGrid read_grid_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  long long nq = 0, np = 0;
  double qmin, qmax, pmin, pmax;
  std::string header;
  std::getline(in, header);
  if (std::sscanf(header.c_str(), "%lld %lld %lf %lf %lf %lf", &nq, &np, &qmin, &qmax, &pmin,
                  &pmax) != 6)
    throw std::runtime_error("bad grid header in " + path);
  WignerGrid g = make_grid({qmin, qmax, pmin, pmax}, nq, np, Frame::lab, 1.0);
  std::vector<double> row(static_cast<std::size_t>(np));
  for (long long i = 0; i < nq; ++i) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    for (long long j = 0; j < np; ++j) g.values(i, j) = row[static_cast<std::size_t>(j)];
  }
  if (!in) throw std::runtime_error("truncated grid data in " + path);
  return g;
}

}  // namespace ehrenfest
