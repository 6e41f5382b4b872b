// 1-dof phase-space solver: Gaussian Wigner construction on a rectangular
// grid, Moyal transport truncated at O(hbar^2), the co-moving-frame coupled
// equations (mean + relative distribution), the step-potential scenario, and
// the symplectic-plus-translation group action.
//
// Spatial derivatives are 4th-order central stencils with one-sided closures
// at the grid edges (outflow: no periodicity; a boundary-mass guard watches
// the domain instead).

#pragma once

#include <functional>
#include <stdexcept>
#include <string>

#include "ehrenfest/eigen.hpp"

namespace ehrenfest {

struct GridError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class Frame { lab, comoving };
enum class MoyalOrder { classical, hbar2 };

struct Domain {
  double qmin, qmax, pmin, pmax;
};

// +- k_std standard deviations around the mean on each axis.
Domain default_domain(const Vec2& z, const Mat2& sigma, double hbar, double k_std = 8.0);

struct WignerGrid {
  Grid2D values;  // (nq x np); row i = q_axis(i), column j = p_axis(j)
  Vec q_axis, p_axis;
  double dq = 0.0, dp = 0.0;
  Frame frame = Frame::lab;
  double hbar = 1.0;

  Index nq() const { return values.rows(); }
  Index np() const { return values.cols(); }
};

WignerGrid make_grid(const Domain& dom, Index nq, Index np, Frame frame, double hbar);

// W = (2 pi hbar)^-1 (det Sigma)^-1/2 exp(-(zeta-z).Sigma^-1(zeta-z)/(2 hbar));
// the physical covariance of the result is hbar * Sigma. Rejects domains that
// fail the 6-sigma containment rule or leave more than 1e-8 boundary mass.
WignerGrid gaussian_init(const Vec2& z, const Mat2& sigma, double hbar, const Domain& dom,
                         Index nq, Index np, Frame frame = Frame::lab);

// Trapezoid quadrature of an arbitrary integrand sampled on the grid.
double quadrature(const WignerGrid& g, const Grid2D& f);

struct GridMoments {
  double mass = 0.0;
  Vec2 mean;     // integral of zeta W
  Mat2 second;   // integral of zeta zeta W / 2
  Mat2 covariance() const {
    const Vec2 mu = mean / mass;
    return (2.0 / mass) * second - mu * mu.transpose();
  }
};

GridMoments grid_moments(const WignerGrid& g);

// Mass fraction carried by the outer two rings of the grid.
double boundary_mass_fraction(const WignerGrid& g);

// 4th-order first derivatives along each axis; need >= 7 points per axis.
Grid2D deriv_q(const Grid2D& w, double dq);
Grid2D deriv_p(const Grid2D& w, double dp);

// {{f, g}} truncated: classical Poisson term, plus at order hbar2 the
// correction -(hbar^2/24)(f_qqq g_ppp - 3 f_qqp g_qpp + 3 f_qpp g_qqp
// - f_ppp g_qqq). All derivatives from the stencils above.
Grid2D moyal_bracket(const Grid2D& f, const Grid2D& g, const WignerGrid& geom, MoyalOrder order);

// d/dt W = {{H, W}} at the chosen truncation.
Grid2D moyal_rhs(const Grid2D& h_field, const WignerGrid& grid, MoyalOrder order);

// | int a {{b,c}} - int c {{a,b}} |.
double moyal_permutation_defect(const Grid2D& a, const Grid2D& b, const Grid2D& c,
                                const WignerGrid& geom, MoyalOrder order);

// ---------------------------------------------------------------------------
// Co-moving frame

// Effective Hamiltonian H~(z, zeta~) evaluated pointwise on the grid; grad_z
// (optional) is the z-gradient of the field, used for dz = J <grad_z H~>;
// absent, central differences in z with step fd_step_z are used on <H~>.
struct ComovingHamiltonian {
  std::function<double(const Vec2& z, double qt, double pt)> field;
  std::function<Vec2(const Vec2& z, double qt, double pt)> grad_z;
  double fd_step_z = 1e-5;
};

struct ComovingState {
  WignerGrid grid;  // frame = comoving
  Vec2 z;
  double t = 0.0;
};

struct ComovingRhs {
  Vec2 dz;
  Grid2D dw;
};

// dz = J <grad_z H~> / mass;
// dW~ = {{H~, W~}} + v . grad W~ with v = <{zeta~, H~}> / mass, which cancels
// the first-moment drift of the transport term.
ComovingRhs comoving_rhs(const ComovingState& state, const ComovingHamiltonian& ham,
                         MoyalOrder order);

// Energy <H~> / mass by grid quadrature.
double comoving_energy(const ComovingState& state, const ComovingHamiltonian& ham);

// Unit mass against mu Theta(q + q~): qdot = p, pdot = -mu marginal(-q) with
// the sharp p~-marginal (linear interpolation between rows); the W~ transport
// sees the step mollified over `smoothing_cells` grid cells so its force is
// stencil-representable, and the counter-term uses the mollified force
// expectation so the discrete first moment stays pinned.
ComovingRhs step_potential_rhs(double mu, const ComovingState& state,
                               MoyalOrder order = MoyalOrder::classical,
                               double smoothing_cells = 3.0);

// Sharp p~-marginal of the grid at q~ = qstar.
double sharp_marginal(const WignerGrid& g, double qstar);

// Absorbing-layer coefficient field: zero in the interior, rising smoothly
// (quadratic ramp) to `strength` over the outer `width_cells` cells. Scenario
// right-hand sides subtract mask * W to damp content reaching the edge;
// bare one-sided closures otherwise let roundoff-level inflow grow.
Grid2D absorbing_mask(const WignerGrid& g, int width_cells, double strength);

// ---------------------------------------------------------------------------
// Group action

struct GroupElement {
  Mat2 s;       // symplectic
  Vec2 shift;
  double phase = 0.0;  // carried, dynamically inert at this level
};

// Validates the symplectic defect (< 1e-10).
GroupElement make_group_element(const Mat2& s, const Vec2& shift, double phase = 0.0);

// Pullback (Phi W)(zeta) = W(S zeta + shift), bilinear interpolation; throws
// GridError when the transported mass changes by more than clip_tol.
WignerGrid group_action(const GroupElement& g, const WignerGrid& grid, double clip_tol = 1e-3);

// ---------------------------------------------------------------------------
// Snapshots

void write_grid_csv(const std::string& path, const WignerGrid& g);
// One text header line "nq np qmin qmax pmin pmax", then row-major float64.
void write_grid_binary(const std::string& path, const WignerGrid& g);
WignerGrid read_grid_binary(const std::string& path);

}  // namespace ehrenfest
