// ehrenfest: Gaussian moment flows and phase-space Wigner dynamics.
//
//   ehrenfest run <config.json>
//   ehrenfest compare-closures <config.json>
//   ehrenfest cross-validate <config.json>
//   ehrenfest verify-brackets [--samples N --seed S --report file.csv]
//
// Exit codes: 0 success, 2 config/validation failure, 3 runtime abort.

#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "ehrenfest/scenario.hpp"

namespace {

int run_cmd(const std::string& config_path) {
  const auto cfg = ehrenfest::load_config(config_path);
  const auto res = ehrenfest::run_scenario(cfg);
  std::printf("accepted steps: %ld (rejected %ld)\n", res.record.accepted_steps,
              res.record.rejected_steps);
  for (const auto& a : res.artifacts) std::printf("wrote %s\n", a.c_str());
  return 0;
}

int compare_cmd(const std::string& config_path) {
  const auto cfg = ehrenfest::load_config(config_path);
  const auto res = ehrenfest::compare_closures(cfg);
  std::printf("drift conservative:     %.6e\n", res.drift_conservative);
  std::printf("drift non-conservative: %.6e\n", res.drift_nonconservative);
  std::printf("max state deviation:    %.6e\n", res.max_state_deviation);
  for (const auto& a : res.artifacts) std::printf("wrote %s\n", a.c_str());
  return 0;
}

int crossval_cmd(const std::string& config_path) {
  const auto cfg = ehrenfest::load_config(config_path);
  const auto res = ehrenfest::cross_validate(cfg);
  std::printf("quadratic case:     %s\n", res.quadratic_case ? "yes" : "no");
  std::printf("max mean deviation: %.6e\n", res.max_mean_deviation);
  std::printf("max cov deviation:  %.6e\n", res.max_cov_deviation);
  for (const auto& a : res.artifacts) std::printf("wrote %s\n", a.c_str());
  return 0;
}

int verify_cmd(int samples, std::uint64_t seed, const std::string& report) {
  const auto v = ehrenfest::verify_brackets(samples, seed, report);
  std::printf("%-11s %-18s %12s %12s %12s %12s\n", "bracket", "method", "antisym", "leibniz",
              "jacobi", "casimir");
  for (const auto& r : v.reports) {
    std::printf("%-11s %-18s %12.3e %12.3e %12.3e ", r.bracket.c_str(), r.method.c_str(),
                r.antisymmetry, r.leibniz, r.jacobi);
    if (r.casimir_commutation)
      std::printf("%12.3e\n", *r.casimir_commutation);
    else
      std::printf("%12s\n", "-");
  }
  if (!report.empty()) std::printf("wrote %s\n", report.c_str());
  std::printf("%s\n", v.pass ? "PASS" : "FAIL");
  return v.pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian moment flows and phase-space Wigner dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run = app.add_subcommand("run", "execute a scenario from a config file");
  run->add_option("config", config_path, "JSON config file")->required();

  auto* cmp = app.add_subcommand("compare-closures",
                                 "conservative vs non-conservative fourth-order systems");
  cmp->add_option("config", config_path, "JSON config file")->required();

  auto* xval = app.add_subcommand("cross-validate", "grid Wigner evolution vs moment flow");
  xval->add_option("config", config_path, "JSON config file")->required();

  int samples = 50;
  std::uint64_t seed = 1;
  std::string report;
  auto* ver = app.add_subcommand("verify-brackets", "bracket axiom property suite");
  ver->add_option("--samples", samples, "random observables per bracket")->check(CLI::PositiveNumber);
  ver->add_option("--seed", seed, "rng seed");
  ver->add_option("--report", report, "defect report CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return run_cmd(config_path);
    if (cmp->parsed()) return compare_cmd(config_path);
    if (xval->parsed()) return crossval_cmd(config_path);
    if (ver->parsed()) return verify_cmd(samples, seed, report);
  } catch (const ehrenfest::ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ehrenfest::AbortError& e) {
    std::fprintf(stderr, "abort: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "abort: %s\n", e.what());
    return 3;
  }
  return 0;
}
