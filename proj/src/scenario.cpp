#include "ehrenfest/scenario.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ehrenfest/csv.hpp"
#include "ehrenfest/svg.hpp"
#include "ehrenfest/symplectic.hpp"

namespace ehrenfest {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Config parsing

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed,
                std::vector<std::string>& errs) {
  for (const auto& [key, _] : j.items())
    if (!allowed.count(key)) errs.push_back("unknown key '" + where + key + "'");
}

template <typename T>
T get_or(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

ScenarioKind parse_scenario(const std::string& s, std::vector<std::string>& errs) {
  if (s == "harmonic") return ScenarioKind::harmonic;
  if (s == "quartic") return ScenarioKind::quartic;
  if (s == "morse") return ScenarioKind::morse;
  if (s == "step") return ScenarioKind::step;
  if (s == "custom") return ScenarioKind::custom;
  errs.push_back("scenario must be one of harmonic|quartic|morse|step|custom, got '" + s + "'");
  return ScenarioKind::harmonic;
}

ModelKind parse_model(const std::string& s, std::vector<std::string>& errs) {
  if (s == "moment_xz") return ModelKind::moment_xz;
  if (s == "moment_sigma") return ModelKind::moment_sigma;
  if (s == "fourth_order_conservative") return ModelKind::fourth_order_conservative;
  if (s == "fourth_order_nonconservative") return ModelKind::fourth_order_nonconservative;
  if (s == "wigner_comoving") return ModelKind::wigner_comoving;
  if (s == "wigner_lab") return ModelKind::wigner_lab;
  errs.push_back("model must be one of moment_xz|moment_sigma|fourth_order_conservative|"
                 "fourth_order_nonconservative|wigner_comoving|wigner_lab, got '" + s + "'");
  return ModelKind::moment_sigma;
}

Potential parse_potential(const json& j, std::vector<std::string>& errs) {
  std::set<std::string> allowed{"kind", "derivative_order"};
  const std::string kind = get_or<std::string>(j, "kind", "");
  if (kind.empty()) {
    errs.push_back("potential.kind is required");
    return Potential::harmonic(1.0);
  }
  Potential pot = Potential::harmonic(1.0);
  if (kind == "harmonic") {
    allowed.insert("k");
    pot = Potential::harmonic(get_or(j, "k", 1.0));
  } else if (kind == "quartic") {
    allowed.insert("lambda");
    pot = Potential::quartic(get_or(j, "lambda", 1.0));
  } else if (kind == "morse") {
    allowed.insert("D");
    allowed.insert("a");
    pot = Potential::morse(get_or(j, "D", 1.0), get_or(j, "a", 1.0));
  } else if (kind == "step") {
    allowed.insert("mu");
    pot = Potential::step(get_or(j, "mu", 1.0));
  } else if (kind == "polynomial") {
    allowed.insert("coeffs");
    if (!j.contains("coeffs")) {
      errs.push_back("potential.coeffs is required for kind polynomial");
    } else {
      pot = Potential::polynomial(j.at("coeffs").get<std::vector<double>>());
    }
  } else if (kind == "tabulated") {
    allowed.insert("q");
    allowed.insert("v");
    if (!j.contains("q") || !j.contains("v")) {
      errs.push_back("potential.q and potential.v are required for kind tabulated");
    } else {
      try {
        pot = Potential::tabulated(j.at("q").get<std::vector<double>>(),
                                   j.at("v").get<std::vector<double>>());
      } catch (const PotentialError& e) {
        errs.push_back(std::string("potential.tabulated: ") + e.what());
      }
    }
  } else {
    errs.push_back("unknown potential.kind '" + kind + "'");
  }
  check_keys(j, "potential.", allowed, errs);
  if (j.contains("derivative_order")) {
    try {
      pot = pot.with_derivative_order(j.at("derivative_order").get<int>());
    } catch (const PotentialError& e) {
      errs.push_back(std::string("potential.derivative_order: ") + e.what());
    }
  }
  return pot;
}

std::string potential_kind_name(Potential::Kind k) {
  switch (k) {
    case Potential::Kind::harmonic: return "harmonic";
    case Potential::Kind::quartic: return "quartic";
    case Potential::Kind::morse: return "morse";
    case Potential::Kind::step: return "step";
    case Potential::Kind::polynomial: return "polynomial";
    case Potential::Kind::tabulated: return "tabulated";
  }
  return "?";
}

Potential default_potential(ScenarioKind s) {
  switch (s) {
    case ScenarioKind::harmonic: return Potential::harmonic(1.0);
    case ScenarioKind::quartic: return Potential::quartic(1.0);
    case ScenarioKind::morse: return Potential::morse(1.0, 1.0);
    case ScenarioKind::step: return Potential::step(1.0);
    case ScenarioKind::custom: break;
  }
  return Potential::harmonic(1.0);
}

StepperConfig parse_stepper(const json& j, std::vector<std::string>& errs) {
  StepperConfig cfg;
  check_keys(j, "stepper.",
             {"method", "dt", "rtol", "atol", "dt_min", "dt_max", "dt_init", "horizon"}, errs);
  if (!j.contains("method")) errs.push_back("stepper.method is required");
  if (!j.contains("horizon")) errs.push_back("stepper.horizon is required");
  const std::string method = get_or<std::string>(j, "method", "rk4_fixed");
  if (method == "rk4_fixed") {
    cfg.method = StepMethod::rk4_fixed;
    if (!j.contains("dt")) errs.push_back("stepper.dt is required for rk4_fixed");
  } else if (method == "embedded_adaptive") {
    cfg.method = StepMethod::embedded_adaptive;
  } else {
    errs.push_back("stepper.method must be rk4_fixed or embedded_adaptive");
  }
  cfg.dt = get_or(j, "dt", cfg.dt);
  cfg.rtol = get_or(j, "rtol", cfg.rtol);
  cfg.atol = get_or(j, "atol", cfg.atol);
  cfg.dt_min = get_or(j, "dt_min", cfg.dt_min);
  cfg.dt_max = get_or(j, "dt_max", cfg.dt_max);
  cfg.dt_init = get_or(j, "dt_init", cfg.dt_init);
  cfg.horizon = get_or(j, "horizon", cfg.horizon);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    errs.push_back(e.what());
  }
  return cfg;
}

GridConfig parse_grid(const json& j, std::vector<std::string>& errs) {
  GridConfig g;
  check_keys(j, "grid.",
             {"qmin", "qmax", "pmin", "pmax", "nq", "np", "moyal_order", "boundary_mass_limit",
              "linearize_hamiltonian", "smoothing_cells", "write_snapshots", "snapshot_format",
              "absorb_width", "absorb_strength"},
             errs);
  const int have = j.contains("qmin") + j.contains("qmax") + j.contains("pmin") + j.contains("pmax");
  if (have == 4) {
    g.domain = Domain{j.at("qmin").get<double>(), j.at("qmax").get<double>(),
                      j.at("pmin").get<double>(), j.at("pmax").get<double>()};
  } else if (have != 0) {
    errs.push_back("grid domain needs all of qmin, qmax, pmin, pmax (or none)");
  }
  g.nq = get_or<Index>(j, "nq", g.nq);
  g.np = get_or<Index>(j, "np", g.np);
  const std::string order = get_or<std::string>(j, "moyal_order", "classical");
  if (order == "classical") {
    g.moyal_order = MoyalOrder::classical;
  } else if (order == "hbar2") {
    g.moyal_order = MoyalOrder::hbar2;
  } else {
    errs.push_back("grid.moyal_order must be classical or hbar2");
  }
  g.boundary_mass_limit = get_or(j, "boundary_mass_limit", g.boundary_mass_limit);
  g.linearize_hamiltonian = get_or(j, "linearize_hamiltonian", g.linearize_hamiltonian);
  g.smoothing_cells = get_or(j, "smoothing_cells", g.smoothing_cells);
  g.write_snapshots = get_or(j, "write_snapshots", g.write_snapshots);
  g.snapshot_format = get_or<std::string>(j, "snapshot_format", g.snapshot_format);
  g.absorb_width = get_or(j, "absorb_width", g.absorb_width);
  g.absorb_strength = get_or(j, "absorb_strength", g.absorb_strength);
  if (g.absorb_width < 0) errs.push_back("grid.absorb_width must be >= 0");
  if (g.absorb_strength < 0.0) errs.push_back("grid.absorb_strength must be >= 0");
  if (g.snapshot_format != "csv" && g.snapshot_format != "binary")
    errs.push_back("grid.snapshot_format must be csv or binary");
  return g;
}

bool is_wigner(ModelKind m) {
  return m == ModelKind::wigner_comoving || m == ModelKind::wigner_lab;
}
bool is_fourth_order(ModelKind m) {
  return m == ModelKind::fourth_order_conservative || m == ModelKind::fourth_order_nonconservative;
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config parse error: ") + e.what());
  }
  std::vector<std::string> errs;
  check_keys(j, "",
             {"scenario", "model", "hbar", "require_quantum_admissible", "potential", "initial",
              "closure", "stepper", "grid", "outputs"},
             errs);

  ScenarioConfig cfg;
  if (!j.contains("scenario")) errs.push_back("scenario is required");
  if (!j.contains("model")) errs.push_back("model is required");
  if (!j.contains("initial")) errs.push_back("initial is required");
  if (!j.contains("stepper")) errs.push_back("stepper is required");

  if (j.contains("scenario")) cfg.scenario = parse_scenario(j.at("scenario").get<std::string>(), errs);
  if (j.contains("model")) cfg.model = parse_model(j.at("model").get<std::string>(), errs);
  cfg.hbar = get_or(j, "hbar", 1.0);
  if (cfg.hbar <= 0.0) errs.push_back("hbar must be positive");
  cfg.require_quantum_admissible = get_or(j, "require_quantum_admissible", true);

  if (j.contains("potential")) {
    cfg.potential = parse_potential(j.at("potential"), errs);
    if (cfg.scenario != ScenarioKind::custom &&
        potential_kind_name(cfg.potential.kind()) != j.value("scenario", ""))
      errs.push_back("potential.kind must match the named scenario (use scenario custom to override)");
  } else if (cfg.scenario == ScenarioKind::custom) {
    errs.push_back("scenario custom requires an explicit potential");
  } else {
    cfg.potential = default_potential(cfg.scenario);
  }

  if (j.contains("initial")) {
    const json& ini = j.at("initial");
    check_keys(ini, "initial.", {"z", "sigma"}, errs);
    if (!ini.contains("z")) errs.push_back("initial.z is required");
    if (!ini.contains("sigma")) errs.push_back("initial.sigma is required");
    if (ini.contains("z")) {
      const auto z = ini.at("z").get<std::vector<double>>();
      if (z.size() != 2) {
        errs.push_back("initial.z must have length 2 (scenarios are 1-dof)");
      } else {
        cfg.z0 << z[0], z[1];
      }
    }
    if (ini.contains("sigma")) {
      const auto s = ini.at("sigma").get<std::vector<std::vector<double>>>();
      if (s.size() != 2 || s[0].size() != 2 || s[1].size() != 2) {
        errs.push_back("initial.sigma must be a 2x2 matrix");
      } else {
        cfg.sigma0 << s[0][0], s[0][1], s[1][0], s[1][1];
        if (std::abs(s[0][1] - s[1][0]) > 1e-14 * (1.0 + std::abs(s[0][1])))
          errs.push_back("initial.sigma must be symmetric");
      }
    }
  }

  if (j.contains("closure")) {
    const json& c = j.at("closure");
    check_keys(c, "closure.", {"truncation_order", "conservative"}, errs);
    cfg.truncation_order = get_or(c, "truncation_order", 4);
    cfg.conservative = get_or(c, "conservative", true);
    if (cfg.truncation_order < 0) errs.push_back("closure.truncation_order must be >= 0");
  }

  if (j.contains("stepper")) cfg.stepper = parse_stepper(j.at("stepper"), errs);
  if (j.contains("grid")) cfg.grid = parse_grid(j.at("grid"), errs);

  if (j.contains("outputs")) {
    const json& o = j.at("outputs");
    check_keys(o, "outputs.", {"directory", "trajectory_csv", "monitors_svg", "orbit_svg"}, errs);
    cfg.outputs.directory = get_or<std::string>(o, "directory", cfg.outputs.directory);
    cfg.outputs.trajectory_csv = get_or<std::string>(o, "trajectory_csv", cfg.outputs.trajectory_csv);
    cfg.outputs.monitors_svg = get_or<std::string>(o, "monitors_svg", cfg.outputs.monitors_svg);
    cfg.outputs.orbit_svg = get_or<std::string>(o, "orbit_svg", cfg.outputs.orbit_svg);
  }

  // cross-field rules
  if (cfg.scenario == ScenarioKind::step && cfg.model != ModelKind::wigner_comoving)
    errs.push_back("the step scenario requires model wigner_comoving");
  if (is_fourth_order(cfg.model) && cfg.potential.derivative_order() < 5)
    errs.push_back("fourth-order closure models need potential.derivative_order >= 5");
  if (cfg.require_quantum_admissible) {
    bool ok = false;
    try {
      ok = uncertainty_admissible(cfg.sigma0, cfg.hbar);
    } catch (const std::invalid_argument& e) {
      errs.push_back(std::string("initial.sigma: ") + e.what());
      ok = true;  // already reported
    }
    if (!ok)
      errs.push_back("initial covariance violates the Williamson uncertainty bound "
                     "(smallest symplectic eigenvalue of hbar*Sigma is below hbar/2)");
  }

  if (!errs.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  - " + e;
    throw ValidationError(msg);
  }
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  ScenarioConfig cfg = parse_config_text(ss.str());
  if (const char* dir = std::getenv("EHRENFEST_OUTPUT_DIR"); dir && *dir)
    cfg.outputs.directory = dir;
  return cfg;
}

// ---------------------------------------------------------------------------
// Runners

namespace {

Vec pack_zm(const Vec2& z, const Mat2& m) {
  Vec y(5);
  y << z(0), z(1), m(0, 0), m(0, 1), m(1, 1);
  return y;
}

void unpack_zm(const Vec& y, Vec2& z, Mat2& m) {
  z << y(0), y(1);
  m << y(2), y(3), y(3), y(4);
}

ClosureSpec make_closure(const ScenarioConfig& cfg) {
  return ClosureSpec{cfg.potential, cfg.truncation_order, cfg.conservative};
}

// moment models track the physical covariance hbar * Sigma
Mat2 physical_covariance(const ScenarioConfig& cfg) { return cfg.hbar * cfg.sigma0; }

TrajectoryRecord run_moment_model(const ScenarioConfig& cfg, bool x_form) {
  MomentFunctional h_sigma;
  try {
    h_sigma = closure_energy_functional(make_closure(cfg));
  } catch (const PotentialError& e) {
    throw ValidationError(e.what());
  }
  const MomentFunctional h = x_form ? to_x_functional(h_sigma) : h_sigma;

  const Mat2 c0 = physical_covariance(cfg);
  const Mat2 m0 = x_form ? Mat2(0.5 * (c0 + cfg.z0 * cfg.z0.transpose())) : c0;

  Rhs rhs = [h, x_form](double, const Vec& y) {
    Vec2 z;
    Mat2 m;
    unpack_zm(y, z, m);
    const MomentRhs r = x_form ? moment_rhs(h, z, m) : covariance_rhs(h, z, m);
    return pack_zm(r.dz, r.dmat.topLeftCorner<2, 2>());
  };

  IntegrateOptions opts;
  opts.state_names = x_form ? std::vector<std::string>{"q", "p", "x_qq", "x_qp", "x_pp"}
                            : std::vector<std::string>{"q", "p", "sigma_qq", "sigma_qp", "sigma_pp"};
  auto to_zx = [x_form](const Vec& y) {
    Vec2 z;
    Mat2 m;
    unpack_zm(y, z, m);
    const Mat2 x = x_form ? m : Mat2(0.5 * (m + z * z.transpose()));
    return std::make_pair(z, x);
  };
  opts.monitors.push_back({"energy", [h](double, const Vec& y) {
                             Vec2 z;
                             Mat2 m;
                             unpack_zm(y, z, m);
                             return h.value(z, m);
                           }});
  opts.monitors.push_back({"casimir_c1", [to_zx](double, const Vec& y) {
                             auto [z, x] = to_zx(y);
                             return casimir(1, z, x);
                           }});
  opts.monitors.push_back({"casimir_c1det", [to_zx](double, const Vec& y) {
                             auto [z, x] = to_zx(y);
                             return casimir_det(z, x);
                           }});
  return integrate(rhs, pack_zm(cfg.z0, m0), cfg.stepper, opts);
}

TrajectoryRecord run_fourth_order(const ScenarioConfig& cfg, bool conservative) {
  const Potential pot = cfg.potential;
  if (pot.derivative_order() < 5)
    throw ValidationError("fourth-order closure models need potential.derivative_order >= 5");
  const FiveMoments m0 = five_moments(cfg.z0, physical_covariance(cfg));

  Rhs rhs = [pot, conservative](double, const Vec& y) {
    const FiveMoments m = y.head<5>();
    const FiveMoments d =
        conservative ? conservative_fourth_order_rhs(pot, m) : nonconservative_fourth_order_rhs(pot, m);
    return Vec(d);
  };

  const ClosureSpec energy_spec{pot, 4, conservative};
  IntegrateOptions opts;
  opts.state_names = {"Q", "P", "Q2", "P2", "QPs"};
  opts.monitors.push_back({"energy", [energy_spec](double, const Vec& y) {
                             auto [z, sigma] = z_sigma_from_five(y.head<5>());
                             return gaussian_energy(energy_spec, z, sigma);
                           }});
  opts.monitors.push_back({"casimir_c1det", [](double, const Vec& y) {
                             auto [z, sigma] = z_sigma_from_five(y.head<5>());
                             return sigma.determinant();
                           }});
  return integrate(rhs, Vec(m0), cfg.stepper, opts);
}

ComovingHamiltonian make_comoving_hamiltonian(const Potential& pot, bool linearize) {
  ComovingHamiltonian ham;
  if (!linearize) {
    // H~(z, zt) = (p + pt)^2/2 + V(q + qt)
    ham.field = [pot](const Vec2& z, double qt, double pt) {
      const double pp = z(1) + pt;
      return 0.5 * pp * pp + pot.value(z(0) + qt);
    };
    if (pot.derivative_order() >= 1) {
      ham.grad_z = [pot](const Vec2& z, double qt, double pt) {
        return Vec2(pot.derivative(1, z(0) + qt), z(1) + pt);
      };
    }
  } else {
    // coherent-state form: H~ = h(z) + grad h(z) . zt, h = p^2/2 + V(q)
    ham.field = [pot](const Vec2& z, double qt, double pt) {
      return 0.5 * z(1) * z(1) + pot.value(z(0)) + pot.derivative(1, z(0)) * qt + z(1) * pt;
    };
    if (pot.derivative_order() >= 2) {
      ham.grad_z = [pot](const Vec2& z, double qt, double pt) {
        return Vec2(pot.derivative(1, z(0)) + pot.derivative(2, z(0)) * qt, z(1) + pt);
      };
    }
  }
  return ham;
}

struct WignerRunner {
  WignerGrid geom;  // axes, spacings, frame, hbar; values swapped per use
  Index nq, np;
  bool comoving;

  Vec pack(const Vec2& z, const Grid2D& w) const {
    Vec y(2 + nq * np);
    if (comoving) {
      y(0) = z(0);
      y(1) = z(1);
    } else {
      y(0) = y(1) = 0.0;
    }
    Eigen::Map<Vec>(y.data() + 2, nq * np) = w.reshaped();
    return y;
  }

  void unpack(const Vec& y, Vec2& z, WignerGrid& g) const {
    z << y(0), y(1);
    g = geom;
    g.values = Eigen::Map<const Grid2D>(y.data() + 2, nq, np);
  }
};

TrajectoryRecord run_wigner_model(const ScenarioConfig& cfg) {
  const bool comoving = cfg.model == ModelKind::wigner_comoving;
  const Vec2 grid_center = comoving ? Vec2(0.0, 0.0) : cfg.z0;

  Domain dom;
  if (cfg.grid.domain) {
    dom = *cfg.grid.domain;
  } else if (comoving) {
    dom = default_domain(Vec2(0, 0), cfg.sigma0, cfg.hbar);
  } else {
    // lab frame: the packet orbits, so size the box around the origin
    const double half = cfg.z0.cwiseAbs().maxCoeff() +
                        8.0 * std::sqrt(cfg.hbar * cfg.sigma0.diagonal().maxCoeff());
    dom = Domain{-half, half, -half, half};
  }

  WignerGrid g0;
  try {
    g0 = gaussian_init(grid_center, cfg.sigma0, cfg.hbar, dom, cfg.grid.nq, cfg.grid.np,
                       comoving ? Frame::comoving : Frame::lab);
  } catch (const GridError& e) {
    throw ValidationError(e.what());
  }

  WignerRunner runner{g0, g0.nq(), g0.np(), comoving};
  runner.geom.values.setZero();
  const Grid2D sponge = absorbing_mask(g0, cfg.grid.absorb_width, cfg.grid.absorb_strength);

  const MoyalOrder order = cfg.grid.moyal_order;
  const bool step_scenario = cfg.scenario == ScenarioKind::step;
  const double mu = step_scenario ? cfg.potential.step_mu() : 0.0;
  const double smoothing = cfg.grid.smoothing_cells;
  const ComovingHamiltonian ham =
      step_scenario ? ComovingHamiltonian{}
                    : make_comoving_hamiltonian(cfg.potential, cfg.grid.linearize_hamiltonian);

  Rhs rhs;
  if (comoving) {
    rhs = [runner, ham, order, step_scenario, mu, smoothing, sponge](double t, const Vec& y) {
      ComovingState st;
      st.t = t;
      runner.unpack(y, st.z, st.grid);
      ComovingRhs r = step_scenario ? step_potential_rhs(mu, st, order, smoothing)
                                    : comoving_rhs(st, ham, order);
      r.dw -= sponge * st.grid.values;
      return runner.pack(r.dz, r.dw);
    };
  } else {
    // lab frame: static Weyl symbol H(q, p) = p^2/2 + V(q)
    Grid2D h_lab(g0.nq(), g0.np());
    for (Index i = 0; i < g0.nq(); ++i)
      for (Index j = 0; j < g0.np(); ++j)
        h_lab(i, j) = 0.5 * g0.p_axis(j) * g0.p_axis(j) + cfg.potential.value(g0.q_axis(i));
    rhs = [runner, h_lab, order, sponge](double, const Vec& y) {
      Vec2 z;
      WignerGrid g;
      runner.unpack(y, z, g);
      return runner.pack(Vec2(0, 0), Grid2D(moyal_rhs(h_lab, g, order) - sponge * g.values));
    };
  }

  IntegrateOptions opts;
  opts.state_names = {"q", "p", "mass", "mean_qt", "mean_pt", "cov_qq", "cov_qp", "cov_pp"};
  opts.record_state = [runner](const Vec& y) {
    Vec2 z;
    WignerGrid g;
    runner.unpack(y, z, g);
    const GridMoments m = grid_moments(g);
    const Mat2 c = m.covariance();
    Vec r(8);
    r << z(0), z(1), m.mass, m.mean(0) / m.mass, m.mean(1) / m.mass, c(0, 0), c(0, 1), c(1, 1);
    return r;
  };

  opts.monitors.push_back({"mass", [runner](double, const Vec& y) {
                             Vec2 z;
                             WignerGrid g;
                             runner.unpack(y, z, g);
                             return grid_moments(g).mass;
                           }});
  if (comoving) {
    opts.monitors.push_back({"first_moment_norm", [runner](double, const Vec& y) {
                               Vec2 z;
                               WignerGrid g;
                               runner.unpack(y, z, g);
                               const GridMoments m = grid_moments(g);
                               return (m.mean / m.mass).cwiseAbs().maxCoeff();
                             }});
  }
  if (step_scenario) {
    opts.monitors.push_back({"energy", [runner, mu](double, const Vec& y) {
                               ComovingState st;
                               runner.unpack(y, st.z, st.grid);
                               const WignerGrid& g = st.grid;
                               Grid2D hfield(g.nq(), g.np());
                               for (Index i = 0; i < g.nq(); ++i) {
                                 const double x = st.z(0) + g.q_axis(i);
                                 const double theta = x > 0.0 ? 1.0 : (x < 0.0 ? 0.0 : 0.5);
                                 for (Index j = 0; j < g.np(); ++j)
                                   hfield(i, j) = 0.5 * g.p_axis(j) * g.p_axis(j) + mu * theta;
                               }
                               const double mass = quadrature(g, g.values);
                               return 0.5 * st.z(1) * st.z(1) +
                                      quadrature(g, (g.values * hfield).eval()) / mass;
                             }});
  } else if (comoving) {
    opts.monitors.push_back({"energy", [runner, ham](double, const Vec& y) {
                               ComovingState st;
                               runner.unpack(y, st.z, st.grid);
                               return comoving_energy(st, ham);
                             }});
  } else {
    Grid2D h_lab(g0.nq(), g0.np());
    for (Index i = 0; i < g0.nq(); ++i)
      for (Index j = 0; j < g0.np(); ++j)
        h_lab(i, j) = 0.5 * g0.p_axis(j) * g0.p_axis(j) + cfg.potential.value(g0.q_axis(i));
    opts.monitors.push_back({"energy", [runner, h_lab](double, const Vec& y) {
                               Vec2 z;
                               WignerGrid g;
                               runner.unpack(y, z, g);
                               const double mass = quadrature(g, g.values);
                               return quadrature(g, (g.values * h_lab).eval()) / mass;
                             }});
  }
  opts.monitors.push_back({"boundary_mass", [runner](double, const Vec& y) {
                             Vec2 z;
                             WignerGrid g;
                             runner.unpack(y, z, g);
                             return boundary_mass_fraction(g);
                           }});

  const double bm_limit = cfg.grid.boundary_mass_limit;
  opts.guard = [runner, bm_limit, step_scenario](double t,
                                                 const Vec& y) -> std::optional<std::string> {
    Vec2 z;
    WignerGrid g;
    runner.unpack(y, z, g);
    const double bm = boundary_mass_fraction(g);
    if (bm > bm_limit)
      return "boundary mass fraction " + std::to_string(bm) + " exceeds limit at t=" +
             std::to_string(t);
    if (step_scenario) {
      const double qstar = -z(0);
      if (qstar < g.q_axis(0) + 2.0 * g.dq || qstar > g.q_axis(g.nq() - 1) - 2.0 * g.dq)
        return "-q left the grid interior at t=" + std::to_string(t);
    }
    return std::nullopt;
  };

  return integrate(rhs, runner.pack(cfg.z0, g0.values), cfg.stepper, opts);
}

TrajectoryRecord run_model(const ScenarioConfig& cfg, ModelKind model) {
  switch (model) {
    case ModelKind::moment_xz: return run_moment_model(cfg, true);
    case ModelKind::moment_sigma: return run_moment_model(cfg, false);
    case ModelKind::fourth_order_conservative: return run_fourth_order(cfg, true);
    case ModelKind::fourth_order_nonconservative: return run_fourth_order(cfg, false);
    case ModelKind::wigner_comoving:
    case ModelKind::wigner_lab: return run_wigner_model(cfg);
  }
  throw ValidationError("unknown model");
}

std::filesystem::path ensure_outdir(const ScenarioConfig& cfg) {
  std::filesystem::path dir(cfg.outputs.directory);
  std::filesystem::create_directories(dir);
  return dir;
}

void emit_plots(const ScenarioConfig& cfg, const std::filesystem::path& dir,
                const std::string& csv_path, const TrajectoryRecord& rec,
                std::vector<std::string>& artifacts) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  if (!cfg.outputs.monitors_svg.empty()) {
    std::vector<PlotSeries> series;
    for (std::size_t i = 0; i < rec.monitor_names.size(); ++i)
      series.push_back({"t", rec.monitor_names[i], kColors[i % 5]});
    const std::string path = (dir / cfg.outputs.monitors_svg).string();
    svg_line_chart(csv_path, series, path, "monitors");
    artifacts.push_back(path);
  }
  if (!cfg.outputs.orbit_svg.empty()) {
    const bool has_qp = !rec.state_names.empty() && rec.state_names[0] == "q";
    const std::string xcol = has_qp ? "q" : "Q";
    const std::string ycol = has_qp ? "p" : "P";
    const std::string path = (dir / cfg.outputs.orbit_svg).string();
    svg_line_chart(csv_path, {{xcol, ycol, "#1f77b4"}}, path, "mean orbit");
    artifacts.push_back(path);
  }
}

}  // namespace

RunResult run_scenario(const ScenarioConfig& cfg) {
  const auto dir = ensure_outdir(cfg);
  RunResult res;
  res.record = run_model(cfg, cfg.model);

  const std::string csv_path = (dir / cfg.outputs.trajectory_csv).string();
  write_trajectory_csv(csv_path, res.record);
  res.artifacts.push_back(csv_path);

  if (is_wigner(cfg.model) && cfg.grid.write_snapshots && res.record.final_state.size() > 0) {
    // rebuild geometry to dump initial/final grids
    ScenarioConfig c2 = cfg;
    const bool comoving = cfg.model == ModelKind::wigner_comoving;
    Domain dom = cfg.grid.domain ? *cfg.grid.domain
                 : comoving ? default_domain(Vec2(0, 0), cfg.sigma0, cfg.hbar)
                            : Domain{};
    WignerGrid g = gaussian_init(comoving ? Vec2(0, 0) : cfg.z0, cfg.sigma0, cfg.hbar,
                                 cfg.grid.domain ? *cfg.grid.domain : dom, cfg.grid.nq,
                                 cfg.grid.np, comoving ? Frame::comoving : Frame::lab);
    const bool bin = cfg.grid.snapshot_format == "binary";
    const std::string ext = bin ? ".bin" : ".csv";
    const std::string p0 = (dir / ("grid_initial" + ext)).string();
    bin ? write_grid_binary(p0, g) : write_grid_csv(p0, g);
    res.artifacts.push_back(p0);
    g.values = Eigen::Map<const Grid2D>(res.record.final_state.data() + 2, g.nq(), g.np());
    const std::string p1 = (dir / ("grid_final" + ext)).string();
    bin ? write_grid_binary(p1, g) : write_grid_csv(p1, g);
    res.artifacts.push_back(p1);
  }

  emit_plots(cfg, dir, csv_path, res.record, res.artifacts);

  if (!res.record.ok())
    throw AbortError(to_string(res.record.status) + ": " + res.record.message +
                     " (partial record in " + csv_path + ")");
  return res;
}

ClosureComparison compare_closures(const ScenarioConfig& cfg) {
  if (cfg.potential.derivative_order() < 5)
    throw ValidationError("compare-closures needs potential.derivative_order >= 5");
  const auto dir = ensure_outdir(cfg);

  ClosureComparison out;
  out.conservative = run_fourth_order(cfg, true);
  out.nonconservative = run_fourth_order(cfg, false);

  auto drift = [](const TrajectoryRecord& r) {
    const double h0 = r.monitors.front()(0);
    double d = 0.0;
    for (const auto& m : r.monitors) d = std::max(d, std::abs(m(0) - h0));
    return d / std::max(std::abs(h0), 1e-300);
  };
  out.drift_conservative = drift(out.conservative);
  out.drift_nonconservative = drift(out.nonconservative);

  if (out.conservative.times.size() == out.nonconservative.times.size()) {
    double d = 0.0;
    for (std::size_t i = 0; i < out.conservative.times.size(); ++i)
      d = std::max(d, (out.conservative.states[i] - out.nonconservative.states[i])
                          .cwiseAbs()
                          .maxCoeff());
    out.max_state_deviation = d;
  } else {
    out.max_state_deviation = std::numeric_limits<double>::quiet_NaN();
  }

  const std::string pc = (dir / "closure_conservative.csv").string();
  const std::string pn = (dir / "closure_nonconservative.csv").string();
  write_trajectory_csv(pc, out.conservative);
  write_trajectory_csv(pn, out.nonconservative);
  const std::string ps = (dir / "closure_summary.txt").string();
  {
    std::ofstream s(ps);
    s << "potential: " << cfg.potential.describe() << "\n"
      << "drift_conservative: " << format_g17(out.drift_conservative) << "\n"
      << "drift_nonconservative: " << format_g17(out.drift_nonconservative) << "\n"
      << "drift_ratio: "
      << format_g17(out.drift_nonconservative / std::max(out.drift_conservative, 1e-300)) << "\n"
      << "max_state_deviation: " << format_g17(out.max_state_deviation) << "\n";
  }
  out.artifacts = {pc, pn, ps};

  if (!out.conservative.ok() || !out.nonconservative.ok())
    throw AbortError("closure comparison aborted: " + out.conservative.message +
                     out.nonconservative.message);
  return out;
}

CrossValidation cross_validate(const ScenarioConfig& cfg) {
  if (cfg.stepper.method != StepMethod::rk4_fixed)
    throw ValidationError("cross-validate requires stepper.method rk4_fixed so the two runs share "
                          "their time grids");
  const auto dir = ensure_outdir(cfg);

  ScenarioConfig grid_cfg = cfg;
  grid_cfg.model = ModelKind::wigner_comoving;
  ScenarioConfig mom_cfg = cfg;
  mom_cfg.model = ModelKind::moment_sigma;

  CrossValidation out;
  out.quadratic_case = cfg.potential.kind() == Potential::Kind::harmonic;
  out.grid_record = run_model(grid_cfg, ModelKind::wigner_comoving);
  out.moment_record = run_model(mom_cfg, ModelKind::moment_sigma);

  const std::size_t n = std::min(out.grid_record.times.size(), out.moment_record.times.size());
  for (std::size_t i = 0; i < n; ++i) {
    const Vec& g = out.grid_record.states[i];   // q p mass mqt mpt cqq cqp cpp
    const Vec& m = out.moment_record.states[i]; // q p sqq sqp spp
    const double dq = std::abs(g(0) + g(3) - m(0));
    const double dp = std::abs(g(1) + g(4) - m(1));
    out.max_mean_deviation = std::max({out.max_mean_deviation, dq, dp});
    const double dc = std::max({std::abs(g(5) - m(2)), std::abs(g(6) - m(3)),
                                std::abs(g(7) - m(4))});
    out.max_cov_deviation = std::max(out.max_cov_deviation, dc);
  }

  const std::string pg = (dir / "crossval_grid.csv").string();
  const std::string pm = (dir / "crossval_moments.csv").string();
  write_trajectory_csv(pg, out.grid_record);
  write_trajectory_csv(pm, out.moment_record);
  const std::string ps = (dir / "crossval_summary.txt").string();
  {
    std::ofstream s(ps);
    s << "potential: " << cfg.potential.describe() << "\n"
      << "quadratic_case: " << (out.quadratic_case ? "yes" : "no") << "\n"
      << "max_mean_deviation: " << format_g17(out.max_mean_deviation) << "\n"
      << "max_cov_deviation: " << format_g17(out.max_cov_deviation) << "\n";
  }
  out.artifacts = {pg, pm, ps};

  if (!out.grid_record.ok())
    throw AbortError("cross-validate grid run aborted: " + out.grid_record.message);
  if (!out.moment_record.ok())
    throw AbortError("cross-validate moment run aborted: " + out.moment_record.message);
  if (out.quadratic_case &&
      std::max(out.max_mean_deviation, out.max_cov_deviation) > kCrossValidateQuadraticTol)
    throw AbortError("cross-validate: quadratic-case deviation " +
                     std::to_string(std::max(out.max_mean_deviation, out.max_cov_deviation)) +
                     " exceeds " + std::to_string(kCrossValidateQuadraticTol));
  return out;
}

BracketVerification verify_brackets(int samples, std::uint64_t seed, const std::string& report_csv) {
  BracketVerification v;
  for (const auto kind : {BracketKind::canonical, BracketKind::moment, BracketKind::covariance}) {
    v.reports.push_back(bracket_axiom_suite(kind, samples, seed, false));
    v.reports.push_back(bracket_axiom_suite(kind, samples, seed, true));
  }
  v.pass = true;
  for (const auto& r : v.reports) {
    const double tol = r.method == "analytic" ? kAxiomTolAnalytic : kAxiomTolFd;
    if (std::max({r.antisymmetry, r.leibniz, r.jacobi}) > tol) v.pass = false;
    if (r.casimir_commutation && *r.casimir_commutation > kAxiomTolCasimir) v.pass = false;
  }
  if (!report_csv.empty()) write_axiom_reports_csv(report_csv, v.reports);
  return v;
}

}  // namespace ehrenfest
