// Command-line front end over the npglab C API.
//
//   npglab run <spec.json|preset-name> [--out-dir DIR] [--seed-base N]
//              [--iterations N] [--threads N]
//   npglab verify [--suite NAME] [--out-dir DIR]
//   npglab analyze slope --input trace.csv [--window-lo T] [--window-hi T]
//   npglab analyze committal --input trace.csv
//   npglab analyze failure --input summary.json [--threshold X]
//
// Exit code is nonzero if a verify check fails or any call errors out.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "npglab.h"

namespace {

struct OwnedString {
  char* value = nullptr;
  ~OwnedString() { npg_string_free(value); }
};

int fail(int status) {
  std::cerr << "error (" << npg_status_name(status) << "): " << npg_last_error()
            << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"on-policy stochastic natural policy gradient laboratory"};
  app.require_subcommand(1);

  std::string spec_arg, out_dir = "out", suite = "all", input;
  std::uint64_t seed_base = 0, iterations = 0;
  unsigned threads = 1;
  double window_lo = 1e3, window_hi = 1e9, threshold = 1e-3;

  auto* run = app.add_subcommand("run", "run an experiment spec or preset");
  run->add_option("spec", spec_arg, "spec JSON file or preset name")->required();
  run->add_option("--out-dir", out_dir, "output directory (default: out)");
  run->add_option("--seed-base", seed_base, "rebase the seed list at this value");
  run->add_option("--iterations", iterations, "override the iteration budget");
  run->add_option("--threads", threads, "worker pool size");

  auto* verify = app.add_subcommand("verify", "run exact-expectation checks");
  verify->add_option("--suite", suite,
                     "lemma1|lemma3|domination|nl-coeff|variance|smoothness|"
                     "perf-diff|products|all");
  verify->add_option("--out-dir", out_dir, "also write report.json here");
  bool verify_to_dir = false;

  auto* analyze = app.add_subcommand("analyze", "fit statistics from trace files");
  auto* slope = analyze->add_subcommand("slope", "log-log rate fit of the gap");
  slope->add_option("--input", input, "trace CSV")->required();
  slope->add_option("--window-lo", window_lo, "fit window lower bound (default 1e3)");
  slope->add_option("--window-hi", window_hi, "fit window upper bound");
  double committal_lo = 1.0, committal_hi = 1e18;
  auto* committal =
      analyze->add_subcommand("committal", "decay exponent of 1 - pi_opt");
  committal->add_option("--input", input, "forced-action trace CSV")->required();
  committal->add_option("--window-lo", committal_lo, "fit window lower bound");
  committal->add_option("--window-hi", committal_hi, "fit window upper bound");
  auto* failure = analyze->add_subcommand("failure", "failed-run fraction");
  failure->add_option("--input", input, "summary.json of a run")->required();
  failure->add_option("--threshold", threshold,
                      "optimal-action probability cutoff (default 1e-3)");

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) {
    npg_experiment* exp = nullptr;
    if (int rc = npg_experiment_load(spec_arg.c_str(), &exp)) return fail(rc);
    if (seed_base > 0)
      if (int rc = npg_experiment_rebase_seeds(exp, seed_base)) return fail(rc);
    if (iterations > 0)
      if (int rc = npg_experiment_set_iterations(exp, iterations)) return fail(rc);
    OwnedString summary;
    int rc = npg_experiment_run(exp, out_dir.c_str(), threads, &summary.value);
    npg_experiment_free(exp);
    if (rc) return fail(rc);
    std::cout << summary.value << "\n";
    return 0;
  }

  if (verify->parsed()) {
    verify_to_dir = verify->count("--out-dir") > 0;
    OwnedString report;
    int failures = 0;
    if (int rc = npg_verify(suite.c_str(), &report.value, &failures)) return fail(rc);
    std::cout << report.value << "\n";
    if (verify_to_dir) {
      std::filesystem::create_directories(out_dir);
      std::ofstream file(std::filesystem::path(out_dir) / "report.json");
      file << report.value << "\n";
    }
    if (failures > 0) {
      std::cerr << failures << " check(s) failed\n";
      return 1;
    }
    return 0;
  }

  if (slope->parsed()) {
    double fit_slope = 0.0, r2 = 0.0;
    if (int rc =
            npg_analyze_slope(input.c_str(), window_lo, window_hi, &fit_slope, &r2))
      return fail(rc);
    std::printf("slope %.6f r2 %.6f window [%g, %g]\n", fit_slope, r2, window_lo,
                window_hi);
    return 0;
  }

  if (committal->parsed()) {
    double exponent = 0.0;
    int superpolynomial = 0;
    if (int rc = npg_analyze_committal(input.c_str(), committal_lo, committal_hi,
                                       &exponent, &superpolynomial))
      return fail(rc);
    std::printf("exponent %.6f model %s\n", exponent,
                superpolynomial ? "superpolynomial" : "polynomial");
    return 0;
  }

  if (failure->parsed()) {
    double fraction = 0.0;
    if (int rc = npg_analyze_failure(input.c_str(), threshold, &fraction))
      return fail(rc);
    std::printf("failure_rate %.6f threshold %g\n", fraction, threshold);
    return 0;
  }

  std::cerr << app.help();
  return 1;
}
