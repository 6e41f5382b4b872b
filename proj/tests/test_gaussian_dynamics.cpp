#include <doctest.h>

#include <random>

#include "ehrenfest/brackets.hpp"
#include "ehrenfest/gaussian_dynamics.hpp"
#include "ehrenfest/symplectic.hpp"
#include "support/gauss_hermite.hpp"

using namespace ehrenfest;

TEST_CASE("gaussian closure energy: worked values") {
  // harmonic, N = 2, z = (1, 0), sigma = I/2: 1/2 + 1/4 + 1/4 = 1
  ClosureSpec harm{Potential::harmonic(1.0), 2, true};
  Mat2 half = 0.5 * Mat2::Identity();
  CHECK(gaussian_energy(harm, Vec2(1.0, 0.0), half) == doctest::Approx(1.0).epsilon(1e-14));

  // vanishing variance: classical energy p^2/2 + V(q)
  ClosureSpec morse{Potential::morse(1.2, 0.8), 4, true};
  Mat2 tiny = 1e-300 * Mat2::Identity();
  const Vec2 z(0.7, -0.4);
  CHECK(gaussian_energy(morse, z, tiny) ==
        doctest::Approx(0.5 * 0.16 + morse.potential.value(0.7)).epsilon(1e-12));

  // quartic, N = 4, q = p = 0, var = 1: 3 V''''(0) / 24 = 0.75
  ClosureSpec quart{Potential::quartic(1.0), 4, true};
  CHECK(gaussian_energy(quart, Vec2(0.0, 0.0), Mat2::Identity()) ==
        doctest::Approx(0.75 + 0.5).epsilon(1e-14));  // + sigma_pp/2

  // truncation order above available derivatives is rejected
  ClosureSpec over{Potential::quartic(1.0).with_derivative_order(3), 4, true};
  CHECK_THROWS_AS(gaussian_energy(over, Vec2(0, 0), Mat2::Identity()), PotentialError);
  CHECK_THROWS_AS(closure_energy_functional(over), PotentialError);
}

TEST_CASE("closure energy against Gauss-Hermite quadrature") {
  const oracle::GaussHermite gh(24);
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uq(-1.5, 1.5), uv(0.1, 2.0);
  std::vector<Potential> pots = {Potential::harmonic(0.9), Potential::quartic(0.6),
                                 Potential::morse(1.0, 1.0),
                                 Potential::polynomial({0.0, 0.3, -0.2, 0.1, 0.05, -0.01})};
  for (const auto& pot : pots) {
    for (int n = 2; n <= 5; ++n) {
      ClosureSpec spec{pot, n, true};
      for (int rep = 0; rep < 10; ++rep) {
        const double q = uq(rng), p = uq(rng), var = uv(rng);
        Mat2 sigma;
        sigma << var, 0.1, 0.1, 0.9;
        const double closed = gaussian_energy(spec, Vec2(q, p), sigma);
        auto taylor = [&](double qt) {
          double acc = 0.0, fact = 1.0;
          for (int m = 0; m <= n; ++m) {
            if (m > 0) fact *= m;
            acc += pot.derivative(m, q) * std::pow(qt, m) / fact;
          }
          return acc;
        };
        const double quad = 0.5 * p * p + 0.5 * sigma(1, 1) + gh.expect(taylor, 0.0, var);
        CHECK(closed == doctest::Approx(quad).epsilon(1e-12).scale(1.0));
      }
    }
  }
}

TEST_CASE("closure energy for the step potential uses the smeared expectation") {
  ClosureSpec spec{Potential::step(2.0), 4, true};
  Mat2 sigma;
  sigma << 1.0, 0.0, 0.0, 1.0;
  // <Theta(q + qt)> = Phi(q / sqrt(var)): at q = 0 this is 1/2
  CHECK(gaussian_energy(spec, Vec2(0.0, 0.3), sigma) ==
        doctest::Approx(0.5 * 0.09 + 0.5 + 2.0 * 0.5).epsilon(1e-13));
  const auto f = closure_energy_functional(spec);
  const Vec z = (Vec(2) << 0.4, 0.3).finished();
  const Vec gz = fd_grad_z(f.value, z, sigma, 1e-6);
  const Mat gm = fd_grad_mat(f.value, z, sigma, 1e-6);
  CHECK((f.grad_z(z, sigma) - gz).cwiseAbs().maxCoeff() < 1e-8);
  CHECK((f.grad_mat(z, sigma) - gm).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("closure functional partials match finite differences") {
  std::mt19937_64 rng(43);
  std::vector<Potential> pots = {Potential::harmonic(1.0), Potential::quartic(1.0),
                                 Potential::morse(1.0, 1.0)};
  for (const auto& pot : pots) {
    for (int n : {2, 3, 4}) {
      const auto f = closure_energy_functional(ClosureSpec{pot, n, true});
      for (int rep = 0; rep < 20; ++rep) {
        const MomentPoint pt = random_admissible_state(1, rng);
        const Vec gz = fd_grad_z(f.value, pt.z, pt.sigma, 1e-6);
        const Mat gm = fd_grad_mat(f.value, pt.z, pt.sigma, 1e-6);
        CHECK((f.grad_z(pt.z, pt.sigma) - gz).cwiseAbs().maxCoeff() < 1e-7);
        CHECK((f.grad_mat(pt.z, pt.sigma) - gm).cwiseAbs().maxCoeff() < 1e-7);
      }
    }
  }
}

TEST_CASE("moment flow: worked values") {
  const Vec z = (Vec(2) << 1.0, 0.0).finished();
  const Mat x = 0.5 * Mat::Identity(2, 2);

  // h = Tr(X): dz = J z, dX = 0
  const auto trx = quadratic_energy_x(Mat::Identity(2, 2), Vec::Zero(2));
  const MomentRhs r1 = moment_rhs(trx, z, x);
  CHECK(r1.dz(0) == doctest::Approx(0.0));
  CHECK(r1.dz(1) == doctest::Approx(-1.0));
  CHECK(r1.dmat.cwiseAbs().maxCoeff() < 1e-15);

  // h = X_pp (free particle): dX = [[0, 1/2], [1/2, 0]] at z = 0, X = I/2
  Mat spp = Mat::Zero(2, 2);
  spp(1, 1) = 1.0;
  const auto hfree = quadratic_energy_x(spp, Vec::Zero(2));
  const MomentRhs r2 = moment_rhs(hfree, Vec::Zero(2), x);
  CHECK(r2.dmat(0, 1) == doctest::Approx(0.5));
  CHECK(r2.dmat(1, 0) == doctest::Approx(0.5));
  CHECK(r2.dmat(0, 0) == doctest::Approx(0.0));
  CHECK(r2.dz.cwiseAbs().maxCoeff() < 1e-15);

  // constant h: zero generator
  MomentFunctional hconst;
  hconst.value = [](const Vec&, const Mat&) { return 3.7; };
  hconst.grad_z = [](const Vec& zz, const Mat&) { return Vec::Zero(zz.size()).eval(); };
  hconst.grad_mat = [](const Vec&, const Mat& m) { return Mat::Zero(m.rows(), m.cols()).eval(); };
  const MomentRhs r3 = moment_rhs(hconst, z, x);
  CHECK(r3.dz.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r3.dmat.cwiseAbs().maxCoeff() == 0.0);

  // asymmetric dh/dX is rejected
  MomentFunctional bad = hconst;
  bad.grad_mat = [](const Vec&, const Mat&) {
    Mat g(2, 2);
    g << 0.0, 1.0, 0.0, 0.0;
    return g;
  };
  CHECK_THROWS_AS(moment_rhs(bad, z, x), std::invalid_argument);
}

TEST_CASE("covariance flow: worked values") {
  // harmonic S = I: ground covariance I is stationary
  const auto h = quadratic_energy_sigma(Mat::Identity(2, 2), Vec::Zero(2));
  const Vec z = (Vec(2) << 0.4, -0.1).finished();
  const MomentRhs r1 = covariance_rhs(h, z, Mat::Identity(2, 2));
  CHECK(r1.dmat.cwiseAbs().maxCoeff() < 1e-15);

  // free particle h = Sigma_pp / 2: dSigma = [[0,1],[1,0]] at Sigma = I,
  // the Riccati flow A Sigma + Sigma A^T with A = J diag(0,1)
  Mat spp = Mat::Zero(2, 2);
  spp(1, 1) = 1.0;
  const auto hfree = quadratic_energy_sigma(spp, Vec::Zero(2));
  const MomentRhs r2 = covariance_rhs(hfree, z, Mat::Identity(2, 2));
  CHECK(r2.dmat(0, 1) == doctest::Approx(1.0));
  CHECK(r2.dmat(1, 0) == doctest::Approx(1.0));
  CHECK(r2.dmat(0, 0) == doctest::Approx(0.0));
  CHECK(r2.dmat(1, 1) == doctest::Approx(0.0));

  // h independent of Sigma: dSigma = 0
  const auto hz = quadratic_energy_sigma(Mat::Zero(2, 2), (Vec(2) << 1.0, 2.0).finished());
  const MomentRhs r3 = covariance_rhs(hz, z, Mat::Identity(2, 2));
  CHECK(r3.dmat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(r3.dz(0) == doctest::Approx(2.0));  // J grad h
  CHECK(r3.dz(1) == doctest::Approx(-1.0));
}

TEST_CASE("quadratic-Hamiltonian Riccati oracle at random states") {
  // for h built from H = zeta.S zeta/2 + w.zeta: dSigma = A Sigma + Sigma A^T,
  // A = J S -- the known linear covariance flow
  std::mt19937_64 rng(57);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Mat j = symplectic_form(1);
  for (int rep = 0; rep < 50; ++rep) {
    Mat s(2, 2);
    s << u(rng), u(rng), u(rng), u(rng);
    s = symmetrized(s).eval();
    Vec w(2);
    w << u(rng), u(rng);
    const MomentPoint pt = random_admissible_state(1, rng);
    const auto h = quadratic_energy_sigma(s, w);
    const MomentRhs r = covariance_rhs(h, pt.z, pt.sigma);
    const Mat a = j * s;
    CHECK((r.dmat - (a * pt.sigma + pt.sigma * a.transpose())).cwiseAbs().maxCoeff() < 1e-13);
    CHECK((r.dz - (j * (s * pt.z + w))).cwiseAbs().maxCoeff() < 1e-13);
  }
}

namespace {

std::vector<MomentFunctional> random_energies(std::mt19937_64& rng, int count) {
  std::vector<MomentFunctional> hs;
  const auto vars = vector_and_matrix_vars(2);
  for (int i = 0; i < count; ++i) hs.push_back(from_polynomial(random_polynomial(vars, 3, 5, rng)));
  return hs;
}

}  // namespace

TEST_CASE("bracket oracle equivalence: moment and covariance flows") {
  std::mt19937_64 rng(61);
  const auto energies = random_energies(rng, 5);
  for (int rep = 0; rep < 100; ++rep) {
    const MomentPoint pt = random_admissible_state(1, rng);
    for (const auto& h : energies) {
      const MomentRhs rm = moment_rhs(h, pt.z, pt.x);
      const MomentRhs rc = covariance_rhs(h, pt.z, pt.sigma);
      CHECK(symmetry_defect(rm.dmat) < 1e-12);
      CHECK(symmetry_defect(rc.dmat) < 1e-12);
      for (int i = 0; i < 2; ++i) {
        CHECK(std::abs(moment_bracket(vector_entry_observable(i), h, pt.z, pt.x).value -
                       rm.dz(i)) < 1e-9);
        CHECK(std::abs(covariance_bracket(vector_entry_observable(i), h, pt.z, pt.sigma).value -
                       rc.dz(i)) < 1e-9);
        for (int k = i; k < 2; ++k) {
          CHECK(std::abs(moment_bracket(matrix_entry_observable(i, k), h, pt.z, pt.x).value -
                         rm.dmat(i, k)) < 1e-9);
          CHECK(std::abs(covariance_bracket(matrix_entry_observable(i, k), h, pt.z, pt.sigma)
                             .value -
                         rc.dmat(i, k)) < 1e-9);
        }
      }
    }
  }
}

TEST_CASE("chain rule consistency between the two flows") {
  // Sigma = 2X - zz: dSigma predicted from the (z, X) flow matches the
  // (z, Sigma) flow of the same energy
  std::mt19937_64 rng(67);
  std::vector<MomentFunctional> sigma_forms = {
      closure_energy_functional(ClosureSpec{Potential::morse(1.0, 1.0), 4, true}),
      closure_energy_functional(ClosureSpec{Potential::quartic(0.8), 4, true})};
  const auto vars = vector_and_matrix_vars(2);
  for (int i = 0; i < 3; ++i)
    sigma_forms.push_back(from_polynomial(random_polynomial(vars, 3, 5, rng)));

  for (const auto& hs : sigma_forms) {
    const auto hx = to_x_functional(hs);
    for (int rep = 0; rep < 30; ++rep) {
      const MomentPoint pt = random_admissible_state(1, rng);
      const MomentRhs rx = moment_rhs(hx, pt.z, pt.x);
      const MomentRhs rs = covariance_rhs(hs, pt.z, pt.sigma);
      CHECK((rx.dz - rs.dz).cwiseAbs().maxCoeff() < 1e-9);
      const Mat dsigma_pred = 2.0 * rx.dmat - rx.dz * pt.z.transpose() - pt.z * rx.dz.transpose();
      CHECK((dsigma_pred - rs.dmat).cwiseAbs().maxCoeff() < 1e-9);
    }
  }
}

TEST_CASE("energy and casimirs are conserved by the flow generators") {
  std::mt19937_64 rng(71);
  const auto energies = random_energies(rng, 5);
  for (int rep = 0; rep < 40; ++rep) {
    const MomentPoint pt = random_admissible_state(1, rng);
    for (const auto& h : energies) {
      const MomentRhs r = moment_rhs(h, pt.z, pt.x);
      // dh/dt = h_z . dz + Tr(h_X dX) = 0 (bracket antisymmetry)
      const double dh =
          h.grad_z(pt.z, pt.x).dot(r.dz) + (h.grad_mat(pt.z, pt.x) * r.dmat).trace();
      CHECK(std::abs(dh) < 1e-10);
      // Casimirs: dC/dt = 0 along any flow
      for (int jdx = 1; jdx <= 3; ++jdx) {
        const auto c = casimir_functional(jdx);
        const double dc =
            c.grad_z(pt.z, pt.x).dot(r.dz) + (c.grad_mat(pt.z, pt.x) * r.dmat).trace();
        CHECK(std::abs(dc) < 1e-9);
      }
      const auto cd = casimir_det_functional();
      const double dcd =
          cd.grad_z(pt.z, pt.x).dot(r.dz) + (cd.grad_mat(pt.z, pt.x) * r.dmat).trace();
      CHECK(std::abs(dcd) < 1e-9);

      // covariance side: det Sigma invariant
      const MomentRhs rc = covariance_rhs(h, pt.z, pt.sigma);
      const auto ds = det_sigma_functional();
      const double ddet = (ds.grad_mat(pt.z, pt.sigma) * rc.dmat).trace();
      CHECK(std::abs(ddet) < 1e-9);
    }
  }
}

TEST_CASE("classical limit: X-independent energies move z classically") {
  std::mt19937_64 rng(73);
  const Mat j = symplectic_form(1);
  const auto vars = vector_vars(2);
  for (int rep = 0; rep < 20; ++rep) {
    const Polynomial p = random_polynomial(vars, 3, 5, rng);
    const auto h = from_polynomial(p);
    const MomentPoint pt = random_admissible_state(1, rng);
    const MomentRhs r = moment_rhs(h, pt.z, pt.x);
    CHECK((r.dz - j * p.grad_z(pt.z, pt.x)).cwiseAbs().maxCoeff() < 1e-13);
  }
}

TEST_CASE("fourth-order systems: worked values") {
  // harmonic at <Q>=1, <P>=0, <Q2>=1.5, <P2>=0.5, <QP>_s=0
  const auto harm = Potential::harmonic(1.0);
  FiveMoments m;
  m << 1.0, 0.0, 1.5, 0.5, 0.0;
  const FiveMoments d = conservative_fourth_order_rhs(harm, m);
  CHECK(d(0) == doctest::Approx(0.0));
  CHECK(d(1) == doctest::Approx(-1.0));
  CHECK(d(2) == doctest::Approx(0.0));
  CHECK(d(3) == doctest::Approx(0.0));
  CHECK(d(4) == doctest::Approx(-1.0));  // 0.5 - 1 - 0.5

  // zero state with V'(0) = 0 is a fixed point
  FiveMoments zero = FiveMoments::Zero();
  CHECK(conservative_fourth_order_rhs(harm, zero).cwiseAbs().maxCoeff() == 0.0);

  // quartic: V^(5) = 0, conservative and non-conservative coincide exactly
  const auto quart = Potential::quartic(1.0);
  std::mt19937_64 rng(79);
  for (int rep = 0; rep < 50; ++rep) {
    const MomentPoint pt = random_admissible_state(1, rng);
    const FiveMoments mm = five_moments(pt.z.head<2>(), pt.sigma.topLeftCorner<2, 2>());
    CHECK((conservative_fourth_order_rhs(quart, mm) - nonconservative_fourth_order_rhs(quart, mm))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  // morse: the variants differ in dP by exactly V^(5)(Q) var^2 / 8
  const auto morse = Potential::morse(1.0, 1.0);
  FiveMoments mmorse;
  mmorse << 0.3, 0.2, 0.3 * 0.3 + 1.0, 0.2 * 0.2 + 1.0, 0.3 * 0.2;  // unit variances
  const FiveMoments dc = conservative_fourth_order_rhs(morse, mmorse);
  const FiveMoments dn = nonconservative_fourth_order_rhs(morse, mmorse);
  CHECK(dc(1) - dn(1) == doctest::Approx(-0.125 * morse.derivative(5, 0.3)).epsilon(1e-13));
  CHECK(dc(0) == dn(0));
  CHECK(dc(2) == dn(2));

  CHECK_THROWS_AS(conservative_fourth_order_rhs(harm.with_derivative_order(4), m), PotentialError);
}

TEST_CASE("conservative system equals the bracket-derived N=4 closure flow") {
  std::mt19937_64 rng(83);
  std::vector<Potential> pots = {Potential::morse(1.0, 1.0), Potential::quartic(1.0),
                                 Potential::harmonic(1.0),
                                 Potential::polynomial({0.0, 0.1, 0.4, -0.05, 0.02, 0.004})};
  for (const auto& pot : pots) {
    const auto h = closure_energy_functional(ClosureSpec{pot, 4, true});
    for (int rep = 0; rep < 100; ++rep) {
      const MomentPoint pt = random_admissible_state(1, rng);
      const Vec2 z = pt.z.head<2>();
      const Mat2 sigma = pt.sigma.topLeftCorner<2, 2>();
      const MomentRhs rc = covariance_rhs(h, pt.z, pt.sigma);

      const FiveMoments m = five_moments(z, sigma);
      const FiveMoments dm = conservative_fourth_order_rhs(pot, m);

      // translate (dz, dSigma) to raw-moment derivatives
      CHECK(std::abs(dm(0) - rc.dz(0)) < 1e-10);
      CHECK(std::abs(dm(1) - rc.dz(1)) < 1e-10);
      const double dq2 = rc.dmat(0, 0) + 2.0 * z(0) * rc.dz(0);
      const double dp2 = rc.dmat(1, 1) + 2.0 * z(1) * rc.dz(1);
      const double dqp = rc.dmat(0, 1) + rc.dz(0) * z(1) + z(0) * rc.dz(1);
      CHECK(std::abs(dm(2) - dq2) < 1e-10);
      CHECK(std::abs(dm(3) - dp2) < 1e-10);
      CHECK(std::abs(dm(4) - dqp) < 1e-10);
    }
  }
}

TEST_CASE("five-moment helpers invert each other") {
  const Vec2 z(0.3, -0.8);
  Mat2 sigma;
  sigma << 1.2, 0.3, 0.3, 0.9;
  const auto [z2, s2] = z_sigma_from_five(five_moments(z, sigma));
  CHECK((z2 - z).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((s2 - sigma).cwiseAbs().maxCoeff() < 1e-15);
}
