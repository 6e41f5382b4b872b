// Time stepping for moment ODEs and grid PDEs: classic fixed-step RK4 and an
// embedded Dormand-Prince 5(4) pair with a PI controller (safety 0.9).
// Monitors are pure observations sampled at every accepted step; aborts
// (dt underflow, non-finite right-hand side, guard breach) return the partial
// record with a status instead of throwing.

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "ehrenfest/eigen.hpp"

namespace ehrenfest {

enum class StepMethod { rk4_fixed, embedded_adaptive };

struct StepperConfig {
  StepMethod method = StepMethod::rk4_fixed;
  double dt = 1e-2;  // rk4_fixed step
  double rtol = 1e-8;
  double atol = 1e-10;
  double dt_min = 1e-12;
  double dt_max = 1.0;
  double dt_init = 0.0;  // adaptive initial step; 0 = automatic
  double horizon = 1.0;

  void validate() const;  // throws std::invalid_argument
};

enum class IntegrationStatus { ok, dt_underflow, nonfinite_rhs, guard_abort };

std::string to_string(IntegrationStatus s);

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<Vec> states;  // recorded (possibly projected) state columns
  std::vector<std::string> state_names;
  std::vector<std::string> monitor_names;
  std::vector<Vec> monitors;  // aligned with times
  IntegrationStatus status = IntegrationStatus::ok;
  std::string message;
  long accepted_steps = 0;
  long rejected_steps = 0;
  Vec final_state;  // full (unprojected) state at the last accepted step

  bool ok() const { return status == IntegrationStatus::ok; }
};

using Rhs = std::function<Vec(double, const Vec&)>;

struct Monitor {
  std::string name;
  std::function<double(double, const Vec&)> eval;
};

struct IntegrateOptions {
  std::vector<Monitor> monitors;
  // Maps the full state to the recorded columns; identity when absent.
  std::function<Vec(const Vec&)> record_state;
  std::vector<std::string> state_names;
  // Returns an abort reason to stop the run (checked at t0 and after every
  // accepted step).
  std::function<std::optional<std::string>(double, const Vec&)> guard;
};

TrajectoryRecord integrate(const Rhs& rhs, const Vec& y0, const StepperConfig& cfg,
                           const IntegrateOptions& opts = {});

// One row per accepted step: t, state columns, monitor columns; floats with
// 17 significant digits.
void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec);

}  // namespace ehrenfest
