// Named scenarios behind the CLI: JSON config (strict keys, exhaustive
// missing-field reporting), the moment/grid model runners, the
// conservative-vs-non-conservative closure comparison, and the grid-vs-moment
// cross-validation. Exit-code convention: validation failures map to 2,
// runtime aborts (boundary breach, dt underflow) to 3.

#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ehrenfest/brackets.hpp"
#include "ehrenfest/gaussian_dynamics.hpp"
#include "ehrenfest/integrate.hpp"
#include "ehrenfest/potential.hpp"
#include "ehrenfest/wigner.hpp"

namespace ehrenfest {

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AbortError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScenarioKind { harmonic, quartic, morse, step, custom };
enum class ModelKind {
  moment_xz,
  moment_sigma,
  fourth_order_conservative,
  fourth_order_nonconservative,
  wigner_comoving,
  wigner_lab
};

struct GridConfig {
  std::optional<Domain> domain;  // default: +-8 sigma rule
  Index nq = 256, np = 256;
  MoyalOrder moyal_order = MoyalOrder::classical;
  double boundary_mass_limit = 1e-6;
  bool linearize_hamiltonian = false;
  double smoothing_cells = 3.0;
  bool write_snapshots = false;
  std::string snapshot_format = "csv";  // csv | binary
  int absorb_width = 6;          // absorbing-layer cells per edge (0 disables)
  double absorb_strength = 50.0;
};

struct OutputConfig {
  std::string directory = ".";
  std::string trajectory_csv = "trajectory.csv";
  std::string monitors_svg;  // empty: skip
  std::string orbit_svg;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::harmonic;
  ModelKind model = ModelKind::moment_sigma;
  double hbar = 1.0;
  bool require_quantum_admissible = true;
  Potential potential = Potential::harmonic(1.0);
  Vec2 z0{1.0, 0.0};
  Mat2 sigma0 = 0.5 * Mat2::Identity();
  int truncation_order = 4;
  bool conservative = true;
  StepperConfig stepper;
  GridConfig grid;
  OutputConfig outputs;
};

// Parses and validates; unknown keys are rejected, missing required fields
// are listed exhaustively. EHRENFEST_OUTPUT_DIR overrides outputs.directory.
ScenarioConfig load_config(const std::string& path);
ScenarioConfig parse_config_text(const std::string& json_text);

struct RunResult {
  TrajectoryRecord record;
  std::vector<std::string> artifacts;  // files written
};

RunResult run_scenario(const ScenarioConfig& cfg);

struct ClosureComparison {
  TrajectoryRecord conservative;
  TrajectoryRecord nonconservative;
  double drift_conservative = 0.0;     // max |h - h0| / |h0|
  double drift_nonconservative = 0.0;
  double max_state_deviation = 0.0;    // NaN when step sequences differ
  std::vector<std::string> artifacts;
};

ClosureComparison compare_closures(const ScenarioConfig& cfg);

struct CrossValidation {
  bool quadratic_case = false;
  double max_mean_deviation = 0.0;
  double max_cov_deviation = 0.0;
  TrajectoryRecord grid_record;
  TrajectoryRecord moment_record;
  std::vector<std::string> artifacts;
};

// Quadratic potentials must agree within kCrossValidateQuadraticTol (throws
// AbortError otherwise); other potentials just report the measured deviation.
CrossValidation cross_validate(const ScenarioConfig& cfg);

inline constexpr double kCrossValidateQuadraticTol = 1e-4;

// Defect thresholds applied by verify-brackets (and the acceptance suite).
inline constexpr double kAxiomTolFd = 1e-6;
inline constexpr double kAxiomTolAnalytic = 1e-10;
inline constexpr double kAxiomTolCasimir = 1e-8;

struct BracketVerification {
  std::vector<AxiomDefects> reports;
  bool pass = false;
};

BracketVerification verify_brackets(int samples, std::uint64_t seed,
                                    const std::string& report_csv = "");

}  // namespace ehrenfest
