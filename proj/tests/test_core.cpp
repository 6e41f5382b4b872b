#include <doctest.h>

#include <random>

#include "ehrenfest/brackets.hpp"
#include "ehrenfest/observable.hpp"
#include "ehrenfest/polynomial.hpp"
#include "ehrenfest/potential.hpp"
#include "ehrenfest/symplectic.hpp"

using namespace ehrenfest;

TEST_CASE("canonical symplectic form") {
  const Mat j1 = symplectic_form(1);
  CHECK(j1(0, 1) == 1.0);
  CHECK(j1(1, 0) == -1.0);
  CHECK(j1(0, 0) == 0.0);
  CHECK((j1 * j1 + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // integer arithmetic: antisymmetry and J^2 = -I exact for n = 2
  const auto j2 = symplectic_form<long>(2);
  CHECK((j2 + j2.transpose()).cwiseAbs().maxCoeff() == 0);
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> sq = j2 * j2;
  for (Index i = 0; i < 4; ++i)
    for (Index k = 0; k < 4; ++k) CHECK(sq(i, k) == (i == k ? -1 : 0));

  CHECK_THROWS_AS(symplectic_form(0), std::invalid_argument);
}

TEST_CASE("williamson admissibility") {
  CHECK(uncertainty_admissible(Mat::Identity(2, 2), 1.0));
  CHECK_FALSE(uncertainty_admissible(0.1 * Mat::Identity(2, 2), 1.0));
  Mat s(2, 2);
  s << 2.0, 0.0, 0.0, 0.5;
  CHECK(uncertainty_admissible(s, 1.0));  // symplectic eigenvalue sqrt(2 * 1/2) = 1
  const auto nus = symplectic_eigenvalues(s);
  CHECK(nus.size() == 1);
  CHECK(nus[0] == doctest::Approx(1.0).epsilon(1e-12));

  Mat bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite
  CHECK_THROWS_AS(symplectic_eigenvalues(bad), std::invalid_argument);
}

TEST_CASE("admissibility invariant under symplectic congruence") {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 30; ++rep) {
    const Index n = 1 + (rep % 2);
    const Mat s = random_symplectic(n, rng);
    CHECK(symplectic_defect(s) < 1e-10);
    Mat a(2 * n, 2 * n);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (Index i = 0; i < 2 * n; ++i)
      for (Index k = 0; k < 2 * n; ++k) a(i, k) = u(rng);
    const Mat sigma = a * a.transpose() + 0.4 * Mat::Identity(2 * n, 2 * n);
    const Mat congr = s * sigma * s.transpose();
    const auto nu1 = symplectic_eigenvalues(sigma);
    const auto nu2 = symplectic_eigenvalues(congr);
    for (std::size_t k = 0; k < nu1.size(); ++k)
      CHECK(nu1[k] == doctest::Approx(nu2[k]).epsilon(1e-9));
    CHECK(uncertainty_admissible(sigma, 1.0) == uncertainty_admissible(congr, 1.0));
  }
}

TEST_CASE("potential derivatives: worked values") {
  const auto quart = Potential::quartic(1.0);
  CHECK(quart.derivative(4, 2.0) == doctest::Approx(6.0));
  const auto harm = Potential::harmonic(1.0);
  CHECK(harm.derivative(3, 5.0) == 0.0);
  const auto morse = Potential::morse(1.0, 1.0);
  CHECK(morse.derivative(1, 0.0) == doctest::Approx(0.0));
  // V'(q) = 2 D a e^{-aq} (1 - e^{-aq})
  CHECK(morse.derivative(1, 0.7) ==
        doctest::Approx(2.0 * std::exp(-0.7) * (1.0 - std::exp(-0.7))).epsilon(1e-14));

  CHECK_THROWS_AS(quart.derivative(6, 0.0), PotentialError);  // above declared order
  const auto step = Potential::step(2.0);
  CHECK(step.value(1.0) == 2.0);
  CHECK(step.value(-1.0) == 0.0);
  CHECK(step.value(0.0) == 1.0);
  CHECK_THROWS_AS(step.derivative(1, 0.5), PotentialError);
}

TEST_CASE("potential derivatives agree with central differences") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Potential> pots = {Potential::harmonic(1.3), Potential::quartic(0.7),
                                 Potential::morse(1.1, 0.9),
                                 Potential::polynomial({0.2, -1.0, 0.5, 0.25, -0.1, 0.02})};
  const double h = 1e-4;
  for (const auto& pot : pots) {
    for (int k = 1; k <= pot.derivative_order(); ++k) {
      for (int rep = 0; rep < 100; ++rep) {
        const double q = u(rng);
        const double fd = (pot.derivative(k - 1, q + h) - pot.derivative(k - 1, q - h)) / (2 * h);
        const double an = pot.derivative(k, q);
        CHECK(fd == doctest::Approx(an).epsilon(1e-6).scale(1.0));
      }
    }
  }
}

TEST_CASE("tabulated potential interpolates and differentiates") {
  std::vector<double> q, v;
  for (int i = 0; i <= 40; ++i) {
    const double x = -2.0 + 0.1 * i;
    q.push_back(x);
    v.push_back(std::sin(x));
  }
  const auto tab = Potential::tabulated(q, v);
  CHECK(tab.derivative_order() == 1);
  CHECK(tab.value(0.55) == doctest::Approx(std::sin(0.55)).epsilon(1e-5));
  CHECK(tab.derivative(1, 0.55) == doctest::Approx(std::cos(0.55)).epsilon(1e-3));
  // spline consistency: fd of the spline value reproduces its own derivative
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.8, 1.8);
  for (int rep = 0; rep < 100; ++rep) {
    const double x = u(rng);
    const double fd = (tab.value(x + 1e-5) - tab.value(x - 1e-5)) / 2e-5;
    CHECK(fd == doctest::Approx(tab.derivative(1, x)).epsilon(1e-6).scale(1.0));
  }
  CHECK_THROWS_AS(tab.derivative(2, 0.0), PotentialError);
}

TEST_CASE("smeared step expectation") {
  const auto step = Potential::step(1.0);
  CHECK(step.smeared_step(0.0, 1.0) == doctest::Approx(0.5));
  CHECK(step.smeared_step(3.0, 0.25) == doctest::Approx(1.0).epsilon(1e-8));
  // d/dq at 0 with unit variance is the standard normal density
  CHECK(step.smeared_step_dq(0.0, 1.0) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  const double h = 1e-6;
  const double fd = (step.smeared_step(0.3, 0.8 + h) - step.smeared_step(0.3, 0.8 - h)) / (2 * h);
  CHECK(fd == doctest::Approx(step.smeared_step_dvar(0.3, 0.8)).epsilon(1e-6));
}

TEST_CASE("polynomial algebra: evaluation and partials") {
  std::mt19937_64 rng(19);
  const auto vars = vector_and_matrix_vars(2);
  for (int rep = 0; rep < 25; ++rep) {
    const Polynomial p = random_polynomial(vars, 3, 6, rng);
    const MomentPoint pt = random_admissible_state(1, rng);
    const MomentFunctional f = from_polynomial(p);
    // symbolic partials against central differences
    const Vec gz = fd_grad_z(f.value, pt.z, pt.x, 1e-6);
    const Mat gm = fd_grad_mat(f.value, pt.z, pt.x, 1e-6);
    CHECK((p.grad_z(pt.z, pt.x) - gz).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((p.grad_mat(pt.z, pt.x) - gm).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("functional gradient conventions") {
  // h = Tr(S X): trace-convention gradient is sym(S)
  Mat s(2, 2);
  s << 1.0, 2.0, 0.0, 3.0;
  const MomentFunctional h = quadratic_energy_x(s, Vec::Zero(2));
  const Mat g = h.grad_mat(Vec::Zero(2), Mat::Identity(2, 2));
  CHECK(g(0, 1) == doctest::Approx(1.0));
  CHECK(g(1, 0) == doctest::Approx(1.0));
  CHECK(symmetry_defect(g) == 0.0);

  // directional-derivative check of the fd helpers on a smooth functional
  MomentFunctional f;
  f.value = [](const Vec& z, const Mat& m) {
    return std::sin(z(0)) * m(0, 1) + m(1, 1) * m(1, 1) + z(1) * m(0, 0);
  };
  const Vec z = Vec::Constant(2, 0.4);
  Mat m(2, 2);
  m << 1.0, 0.3, 0.3, 2.0;
  const Vec gz = fd_grad_z(f.value, z, m, 1e-6);
  const Mat gm = fd_grad_mat(f.value, z, m, 1e-6);
  CHECK(gz(0) == doctest::Approx(std::cos(0.4) * 0.3).epsilon(1e-8));
  CHECK(gm(1, 1) == doctest::Approx(4.0).epsilon(1e-8));
  // off-diagonal trace convention: half the independent-entry partial
  CHECK(gm(0, 1) == doctest::Approx(0.5 * std::sin(0.4)).epsilon(1e-8));
}
