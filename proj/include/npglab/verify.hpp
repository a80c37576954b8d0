#pragma once

#include <string>
#include <vector>

namespace npglab {

// One verification check, aggregated over its sweep. `slack` is the worst
// signed margin observed: negative beyond the check's tolerance fails.
struct CheckResult {
  std::string check;
  std::string params;
  double slack = 0.0;
  bool pass = false;
};

// Suites: lemma1, lemma3, domination, nl-coeff, variance, smoothness,
// perf-diff, products, or all. Sweeps are deterministic.
std::vector<CheckResult> verify_suite(const std::string& suite);

std::string report_to_json(const std::vector<CheckResult>& results);

}  // namespace npglab
