#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>

#include "ehrenfest/gaussian_dynamics.hpp"
#include "ehrenfest/integrate.hpp"
#include "ehrenfest/symplectic.hpp"
#include "ehrenfest/wigner.hpp"

using namespace ehrenfest;

namespace {

constexpr double kPi = 3.14159265358979323846;

WignerGrid unit_gaussian(Index n = 128) {
  return gaussian_init(Vec2(0, 0), Mat2::Identity(), 1.0, {-8, 8, -8, 8}, n, n);
}

}  // namespace

TEST_CASE("gaussian_init reproduces its moments") {
  Mat2 sigma = 0.5 * Mat2::Identity();
  // 257 nodes put the mean exactly on a grid point
  const WignerGrid g = gaussian_init(Vec2(1.0, 2.0), sigma, 1.0, {-6, 8, -5, 9}, 257, 257);
  const GridMoments m = grid_moments(g);
  CHECK(std::abs(m.mass - 1.0) < 1e-8);
  CHECK(std::abs(m.mean(0) / m.mass - 1.0) < 1e-8);
  CHECK(std::abs(m.mean(1) / m.mass - 2.0) < 1e-8);
  const Mat2 cov = m.covariance();
  CHECK((cov - sigma).cwiseAbs().maxCoeff() < 1e-6);  // physical covariance = hbar Sigma

  // peak value 1 / (2 pi hbar sqrt(det Sigma)) = 1/pi for Sigma = I/2
  CHECK(g.values.maxCoeff() == doctest::Approx(1.0 / kPi).epsilon(1e-12));

  CHECK_THROWS_AS(gaussian_init(Vec2(1.0, 2.0), sigma, 1.0, {-2, 3, -2, 3}, 64, 64), GridError);
  CHECK_THROWS_AS(gaussian_init(Vec2(0, 0), sigma, 1.0, {-8, 8, -8, 8}, 5, 64), GridError);
}

TEST_CASE("hbar scales the measured covariance") {
  const double hbar = 0.05;
  Mat2 sigma;
  sigma << 1.0, 0.2, 0.2, 1.0;
  const Domain dom = default_domain(Vec2(0, 0), sigma, hbar);
  const WignerGrid g = gaussian_init(Vec2(0, 0), sigma, hbar, dom, 128, 128);
  const GridMoments m = grid_moments(g);
  CHECK(std::abs(m.mass - 1.0) < 1e-8);
  CHECK((m.covariance() - hbar * sigma).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("moments of a translated gaussian shift exactly") {
  const WignerGrid g0 = unit_gaussian();
  const GridMoments m0 = grid_moments(g0);
  CHECK(std::abs(m0.mean(0)) < 1e-10);  // symmetric grid about the origin
  CHECK(std::abs(m0.mean(1)) < 1e-10);

  const WignerGrid g1 = gaussian_init(Vec2(0.75, -0.5), Mat2::Identity(), 1.0,
                                      {-8, 8, -8, 8}, 128, 128);
  const GridMoments m1 = grid_moments(g1);
  CHECK(m1.mean(0) / m1.mass == doctest::Approx(0.75).epsilon(1e-9));
  CHECK(m1.mean(1) / m1.mass == doctest::Approx(-0.5).epsilon(1e-9));
}

TEST_CASE("stencils are exact on cubics") {
  WignerGrid g = make_grid({-2, 2, -2, 2}, 41, 37, Frame::lab, 1.0);
  Grid2D f(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) {
      const double q = g.q_axis(i), p = g.p_axis(j);
      f(i, j) = q * q * q - 2.0 * q * p + 0.5 * p * p * p + q - p;
    }
  const Grid2D fq = deriv_q(f, g.dq), fp = deriv_p(f, g.dp);
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) {
      const double q = g.q_axis(i), p = g.p_axis(j);
      CHECK(fq(i, j) == doctest::Approx(3 * q * q - 2 * p + 1).epsilon(1e-10).scale(10.0));
      CHECK(fp(i, j) == doctest::Approx(-2 * q + 1.5 * p * p - 1).epsilon(1e-10).scale(10.0));
    }
}

TEST_CASE("moyal bracket: quadratic generators reduce to the classical bracket") {
  const WignerGrid g = unit_gaussian();
  Grid2D h(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j)
      h(i, j) = 0.5 * g.p_axis(j) * g.p_axis(j) + 0.5 * g.q_axis(i) * g.q_axis(i) +
                0.3 * g.q_axis(i) * g.p_axis(j);
  const Grid2D classical = moyal_rhs(h, g, MoyalOrder::classical);
  const Grid2D corrected = moyal_rhs(h, g, MoyalOrder::hbar2);
  CHECK((classical - corrected).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("moyal bracket: cubic generator produces the printed correction") {
  const WignerGrid g = unit_gaussian();
  Grid2D h(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) h(i, j) = std::pow(g.q_axis(i), 3);
  const Grid2D diff = moyal_rhs(h, g, MoyalOrder::hbar2) - moyal_rhs(h, g, MoyalOrder::classical);
  const Grid2D wppp = deriv_p(deriv_p(deriv_p(g.values, g.dp), g.dp), g.dp);
  CHECK((diff + 0.25 * g.hbar * g.hbar * wppp).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("moyal bracket of a constant distribution vanishes") {
  WignerGrid g = make_grid({-3, 3, -3, 3}, 64, 64, Frame::lab, 1.0);
  g.values.setConstant(0.7);
  Grid2D h(g.nq(), g.np());
  for (Index i = 0; i < g.nq(); ++i)
    for (Index j = 0; j < g.np(); ++j) h(i, j) = std::sin(g.q_axis(i)) * g.p_axis(j);
  CHECK(moyal_rhs(h, g, MoyalOrder::hbar2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("moyal permutation property") {
  WignerGrid g = make_grid({-6, 6, -6, 6}, 192, 192, Frame::lab, 1.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto bump = [&](double cq, double cp, double w) {
    Grid2D f(g.nq(), g.np());
    for (Index i = 0; i < g.nq(); ++i)
      for (Index j = 0; j < g.np(); ++j) {
        const double dq = g.q_axis(i) - cq, dp = g.p_axis(j) - cp;
        f(i, j) = std::exp(-(dq * dq + dp * dp) / (2.0 * w * w));
      }
    return f;
  };
  for (int rep = 0; rep < 5; ++rep) {
    const Grid2D a = bump(u(rng), u(rng), 1.2 + 0.3 * u(rng));
    const Grid2D b = bump(u(rng), u(rng), 1.2 + 0.3 * u(rng));
    const Grid2D c = bump(u(rng), u(rng), 1.2 + 0.3 * u(rng));
    CHECK(moyal_permutation_defect(a, b, c, g, MoyalOrder::classical) < 1e-6);
    CHECK(moyal_permutation_defect(a, b, c, g, MoyalOrder::hbar2) < 1e-6);
    CHECK(moyal_permutation_defect(a, b, a, g, MoyalOrder::classical) < 1e-6);
  }
  const Grid2D konst = Grid2D::Constant(g.nq(), g.np(), 0.4);
  const Grid2D a = bump(0.2, -0.1, 1.0), c = bump(-0.4, 0.3, 1.3);
  CHECK(moyal_permutation_defect(a, konst, c, g, MoyalOrder::classical) < 1e-10);
}

TEST_CASE("group action: identity, translation, rotation") {
  Mat2 sigma;
  sigma << 1.0, 0.0, 0.0, 0.25;
  const WignerGrid g = gaussian_init(Vec2(0, 0), sigma, 1.0, {-10, 10, -10, 10}, 256, 256);

  const GroupElement id = make_group_element(Mat2::Identity(), Vec2(0, 0));
  const WignerGrid gid = group_action(id, g);
  CHECK((gid.values - g.values).abs().maxCoeff() == 0.0);  // bit-for-bit

  // pure translation: pullback by zeta + shift moves the mean by -shift
  const GroupElement tr = make_group_element(Mat2::Identity(), Vec2(0.5, -0.25));
  const WignerGrid gt = group_action(tr, g);
  const GridMoments mt = grid_moments(gt);
  CHECK(mt.mean(0) / mt.mass == doctest::Approx(-0.5).epsilon(1e-6));
  CHECK(mt.mean(1) / mt.mass == doctest::Approx(0.25).epsilon(1e-6));

  // rotation by pi/2 (symplectic): covariance diag(1, 1/4) -> diag(1/4, 1)
  Mat2 rot;
  rot << 0.0, -1.0, 1.0, 0.0;
  const GroupElement gr = make_group_element(rot, Vec2(0, 0));
  const WignerGrid grr = group_action(gr, g);
  const Mat2 cov = grid_moments(grr).covariance();
  CHECK(cov(0, 0) == doctest::Approx(0.25).epsilon(2e-3));
  CHECK(cov(1, 1) == doctest::Approx(1.0).epsilon(2e-3));

  // non-symplectic matrices are rejected
  Mat2 bad;
  bad << 2.0, 0.0, 0.0, 1.0;
  CHECK_THROWS_AS(make_group_element(bad, Vec2(0, 0)), std::invalid_argument);

  // large shifts clip the support
  const GroupElement far = make_group_element(Mat2::Identity(), Vec2(9.5, 0.0));
  CHECK_THROWS_AS(group_action(far, g), GridError);
}

TEST_CASE("group action equivariance on moments") {
  Mat2 sigma;
  sigma << 1.0, 0.3, 0.3, 0.8;
  const WignerGrid g = gaussian_init(Vec2(0.4, -0.2), sigma, 1.0, {-12, 12, -12, 12}, 256, 256);
  std::mt19937_64 rng(29);
  for (int rep = 0; rep < 5; ++rep) {
    const Mat s = random_symplectic(1, rng, 0.25);
    Mat2 s2 = s;
    std::uniform_real_distribution<double> u(-0.4, 0.4);
    const Vec2 shift(u(rng), u(rng));
    const GroupElement el = make_group_element(s2, shift);
    const WignerGrid gt = group_action(el, g);

    const GridMoments m0 = grid_moments(g);
    const GridMoments m1 = grid_moments(gt);
    const Mat2 sinv = s2.inverse();
    const Vec2 mean_expected = sinv * (Vec2(m0.mean / m0.mass) - shift);
    const Mat2 cov_expected = sinv * m0.covariance() * sinv.transpose();
    const double tol = 5.0 * (g.dq * g.dq + g.dp * g.dp);
    CHECK((Vec2(m1.mean / m1.mass) - mean_expected).cwiseAbs().maxCoeff() < tol);
    CHECK((m1.covariance() - cov_expected).cwiseAbs().maxCoeff() < 2.0 * tol);
  }
}

TEST_CASE("comoving rhs: linear generator freezes the relative state") {
  ComovingState st;
  st.grid = gaussian_init(Vec2(0, 0), 0.5 * Mat2::Identity(), 1.0, {-7, 7, -7, 7}, 96, 96,
                          Frame::comoving);
  st.z = Vec2(1.0, 0.0);
  ComovingHamiltonian ham;
  // coherent form for h = (q^2 + p^2)/2
  ham.field = [](const Vec2& z, double qt, double pt) {
    return 0.5 * (z(0) * z(0) + z(1) * z(1)) + z(0) * qt + z(1) * pt;
  };
  const ComovingRhs r = comoving_rhs(st, ham, MoyalOrder::hbar2);
  CHECK(r.dw.abs().maxCoeff() < 1e-14);  // exact cancellation of transport and counter-term
  CHECK(r.dz(0) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(r.dz(1) == doctest::Approx(-1.0).epsilon(1e-7));
}

TEST_CASE("comoving rhs: harmonic ground state is stationary and z follows the oscillator") {
  ComovingState st;
  st.grid = gaussian_init(Vec2(0, 0), 0.5 * Mat2::Identity(), 1.0, {-7, 7, -7, 7}, 128, 128,
                          Frame::comoving);
  st.z = Vec2(0.8, -0.3);
  ComovingHamiltonian ham;
  ham.field = [](const Vec2& z, double qt, double pt) {
    const double q = z(0) + qt, p = z(1) + pt;
    return 0.5 * (q * q + p * p);
  };
  ham.grad_z = [](const Vec2& z, double qt, double pt) {
    return Vec2(z(0) + qt, z(1) + pt);
  };
  const ComovingRhs r = comoving_rhs(st, ham, MoyalOrder::classical);
  CHECK(r.dz(0) == doctest::Approx(-0.3).epsilon(1e-9));
  CHECK(r.dz(1) == doctest::Approx(-0.8).epsilon(1e-9));
  CHECK(r.dw.abs().maxCoeff() < 1e-4);

  // projected moment derivatives match the stationary covariance flow
  Grid2D wq(st.grid.nq(), st.grid.np());
  double d_mq = 0.0, d_mp = 0.0;
  {
    WignerGrid tmp = st.grid;
    tmp.values = r.dw;
    const GridMoments dm = grid_moments(tmp);
    CHECK(std::abs(dm.mass) < 1e-10);      // mass production is zero
    d_mq = dm.mean(0);
    d_mp = dm.mean(1);
    CHECK(std::abs(d_mq) < 1e-10);         // first moment pinned
    CHECK(std::abs(d_mp) < 1e-10);
    // d<zeta zeta>/2 = 0 for the stationary ground state
    CHECK(dm.second.cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("comoving rhs keeps the first moment pinned for anharmonic fields") {
  ComovingState st;
  st.grid = gaussian_init(Vec2(0, 0), 0.5 * Mat2::Identity(), 1.0, {-7, 7, -7, 7}, 128, 128,
                          Frame::comoving);
  st.z = Vec2(0.5, 0.2);
  const Potential pot = Potential::quartic(0.8);
  ComovingHamiltonian ham;
  ham.field = [pot](const Vec2& z, double qt, double pt) {
    const double p = z(1) + pt;
    return 0.5 * p * p + pot.value(z(0) + qt);
  };
  const ComovingRhs r = comoving_rhs(st, ham, MoyalOrder::hbar2);
  WignerGrid tmp = st.grid;
  tmp.values = r.dw;
  const GridMoments dm = grid_moments(tmp);
  CHECK(std::abs(dm.mass) < 1e-9);
  CHECK(std::abs(dm.mean(0)) < 1e-8);
  CHECK(std::abs(dm.mean(1)) < 1e-8);
}

TEST_CASE("step potential rhs: printed force values") {
  ComovingState st;
  // 193 q-nodes put q~ = 0 exactly on a grid point for the t = 0 force check
  st.grid = gaussian_init(Vec2(0, 0), Mat2::Identity(), 1.0, {-10, 10, -8, 8}, 193, 161,
                          Frame::comoving);
  const double mu = 0.7;

  // q = 0, unit variance: pdot = -mu / sqrt(2 pi)
  st.z = Vec2(0.0, 1.0);
  const ComovingRhs r0 = step_potential_rhs(mu, st);
  CHECK(r0.dz(0) == doctest::Approx(1.0));
  CHECK(r0.dz(1) == doctest::Approx(-mu / std::sqrt(2.0 * kPi)).epsilon(1e-6));

  // far past the step the marginal tail kills the force
  st.z = Vec2(7.5, 1.0);
  const ComovingRhs rfar = step_potential_rhs(mu, st);
  CHECK(std::abs(rfar.dz(1)) < 1e-9);

  // mu = 0: free transport, no force
  st.z = Vec2(0.3, 1.0);
  const ComovingRhs rfree = step_potential_rhs(0.0, st);
  CHECK(rfree.dz(1) == 0.0);

  // -q outside the interior aborts
  st.z = Vec2(10.5, 1.0);
  CHECK_THROWS_AS(step_potential_rhs(mu, st), GridError);

  // first-moment production vanishes discretely
  st.z = Vec2(0.4, 1.0);
  const ComovingRhs rp = step_potential_rhs(mu, st);
  WignerGrid tmp = st.grid;
  tmp.values = rp.dw;
  const GridMoments dm = grid_moments(tmp);
  CHECK(std::abs(dm.mass) < 1e-9);
  CHECK(std::abs(dm.mean(0)) < 1e-8);
  CHECK(std::abs(dm.mean(1)) < 1e-8);
}

TEST_CASE("snapshot round trip") {
  const WignerGrid g = unit_gaussian(64);
  write_grid_binary("grid_test.bin", g);
  const WignerGrid g2 = read_grid_binary("grid_test.bin");
  CHECK(g2.nq() == g.nq());
  CHECK(g2.np() == g.np());
  CHECK((g2.values - g.values).abs().maxCoeff() == 0.0);
  CHECK(g2.q_axis(0) == g.q_axis(0));
  std::remove("grid_test.bin");

  write_grid_csv("grid_test.csv", g);
  std::ifstream in("grid_test.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "q,p,w");
  in.close();
  std::remove("grid_test.csv");
}

TEST_CASE("boundary mass fraction reflects domain adequacy") {
  const WignerGrid good = unit_gaussian();
  CHECK(boundary_mass_fraction(good) < 1e-8);
  WignerGrid tight = make_grid({-2, 2, -2, 2}, 64, 64, Frame::lab, 1.0);
  for (Index i = 0; i < 64; ++i)
    for (Index j = 0; j < 64; ++j)
      tight.values(i, j) =
          std::exp(-0.5 * (tight.q_axis(i) * tight.q_axis(i) + tight.p_axis(j) * tight.p_axis(j)));
  CHECK(boundary_mass_fraction(tight) > 1e-3);
}
