#include "ehrenfest/integrate.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace ehrenfest {

void StepperConfig::validate() const {
  if (horizon <= 0.0) throw std::invalid_argument("stepper: horizon must be positive");
  if (method == StepMethod::rk4_fixed) {
    if (dt <= 0.0) throw std::invalid_argument("stepper: dt must be positive");
  } else {
    if (rtol <= 0.0 || atol <= 0.0) throw std::invalid_argument("stepper: rtol and atol must be positive");
    if (dt_min <= 0.0 || dt_min > dt_max)
      throw std::invalid_argument("stepper: need 0 < dt_min <= dt_max");
  }
}

std::string to_string(IntegrationStatus s) {
  switch (s) {
    case IntegrationStatus::ok: return "ok";
    case IntegrationStatus::dt_underflow: return "dt_underflow";
    case IntegrationStatus::nonfinite_rhs: return "nonfinite_rhs";
    case IntegrationStatus::guard_abort: return "guard_abort";
  }
  return "?";
}

namespace {

struct Recorder {
  const IntegrateOptions& opts;
  TrajectoryRecord& rec;

  void operator()(double t, const Vec& y) const {
    rec.times.push_back(t);
    rec.states.push_back(opts.record_state ? opts.record_state(y) : y);
    Vec m(static_cast<Index>(opts.monitors.size()));
    for (std::size_t i = 0; i < opts.monitors.size(); ++i)
      m(static_cast<Index>(i)) = opts.monitors[i].eval(t, y);
    rec.monitors.push_back(std::move(m));
  }
};

bool finite(const Vec& v) { return v.allFinite(); }

Vec rk4_step(const Rhs& f, double t, const Vec& y, double h) {
  const Vec k1 = f(t, y);
  const Vec k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
  const Vec k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
  const Vec k4 = f(t + h, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

}  // namespace

TrajectoryRecord integrate(const Rhs& rhs, const Vec& y0, const StepperConfig& cfg,
                           const IntegrateOptions& opts) {
  cfg.validate();
  TrajectoryRecord rec;
  rec.state_names = opts.state_names;
  for (const auto& m : opts.monitors) rec.monitor_names.push_back(m.name);
  Recorder record{opts, rec};

  Vec y = y0;
  double t = 0.0;

  if (opts.guard) {
    if (auto why = opts.guard(t, y)) {
      rec.status = IntegrationStatus::guard_abort;
      rec.message = *why;
      record(t, y);
      rec.final_state = y;
      return rec;
    }
  }
  record(t, y);

  auto accept = [&](double tn, const Vec& yn) -> bool {
    t = tn;
    y = yn;
    ++rec.accepted_steps;
    record(t, y);
    if (opts.guard) {
      if (auto why = opts.guard(t, y)) {
        rec.status = IntegrationStatus::guard_abort;
        rec.message = *why;
        return false;
      }
    }
    return true;
  };

  if (cfg.method == StepMethod::rk4_fixed) {
    const long n = std::max(1L, std::lround(std::ceil(cfg.horizon / cfg.dt - 1e-12)));
    for (long i = 0; i < n; ++i) {
      const double h = std::min(cfg.dt, cfg.horizon - t);
      const Vec yn = rk4_step(rhs, t, y, h);
      if (!finite(yn)) {
        rec.status = IntegrationStatus::nonfinite_rhs;
        rec.message = "non-finite state after rk4 step at t=" + std::to_string(t);
        rec.final_state = y;
        return rec;
      }
      if (!accept(t + h, yn)) {
        rec.final_state = y;
        return rec;
      }
    }
    rec.final_state = y;
    return rec;
  }

  // embedded 5(4), FSAL, PI controller
  double h = cfg.dt_init > 0.0 ? cfg.dt_init : std::min(cfg.dt_max, cfg.horizon / 100.0);
  h = std::max(h, cfg.dt_min);
  double err_prev = 1.0;
  Vec k1 = rhs(t, y);
  if (!finite(k1)) {
    rec.status = IntegrationStatus::nonfinite_rhs;
    rec.message = "non-finite right-hand side at t=0";
    rec.final_state = y;
    return rec;
  }

  while (t < cfg.horizon - 1e-14 * cfg.horizon) {
    h = std::min(h, cfg.horizon - t);
    const Vec k2 = rhs(t + c2 * h, y + h * (a21 * k1));
    const Vec k3 = rhs(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
    const Vec k4 = rhs(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec k5 = rhs(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec k6 = rhs(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec k7 = rhs(t + h, y5);

    if (!finite(y5) || !finite(k7)) {
      rec.status = IntegrationStatus::nonfinite_rhs;
      rec.message = "non-finite right-hand side near t=" + std::to_string(t);
      rec.final_state = y;
      return rec;
    }

    const Vec ev = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Index i = 0; i < y.size(); ++i) {
      const double sc = cfg.atol + cfg.rtol * std::max(std::abs(y(i)), std::abs(y5(i)));
      const double r = ev(i) / sc;
      err += r * r;
    }
    err = std::sqrt(err / static_cast<double>(y.size()));

    if (err <= 1.0) {
      if (!accept(t + h, y5)) {
        rec.final_state = y;
        return rec;
      }
      k1 = k7;  // FSAL
      const double fac =
          0.9 * std::pow(std::max(err, 1e-16), -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
      err_prev = std::max(err, 1e-16);
      h = std::min(cfg.dt_max, h * std::min(5.0, std::max(0.2, fac)));
    } else {
      ++rec.rejected_steps;
      const double fac = 0.9 * std::pow(err, -0.2);
      h *= std::min(1.0, std::max(0.2, fac));
    }
    if (h < cfg.dt_min) {
      rec.status = IntegrationStatus::dt_underflow;
      rec.message = "step size underflow at t=" + std::to_string(t);
      rec.final_state = y;
      return rec;
    }
  }
  rec.final_state = y;
  return rec;
}

void write_trajectory_csv(const std::string& path, const TrajectoryRecord& rec) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << "t";
  if (!rec.states.empty()) {
    for (Index i = 0; i < rec.states.front().size(); ++i) {
      if (i < static_cast<Index>(rec.state_names.size()))
        out << ',' << rec.state_names[static_cast<std::size_t>(i)];
      else
        out << ",y" << i;
    }
  }
  for (const auto& n : rec.monitor_names) out << ',' << n;
  out << '\n';
  char buf[64];
  for (std::size_t r = 0; r < rec.times.size(); ++r) {
    std::snprintf(buf, sizeof(buf), "%.17g", rec.times[r]);
    out << buf;
    for (Index i = 0; i < rec.states[r].size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.states[r](i));
      out << ',' << buf;
    }
    for (Index i = 0; i < rec.monitors[r].size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", rec.monitors[r](i));
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace ehrenfest
