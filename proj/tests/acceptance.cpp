// Acceptance suite: one check per criterion, each printing a PASS/FAIL
// line. Run all with no arguments, a single one with --only N.

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "npglab/analyze.hpp"
#include "npglab/bandit.hpp"
#include "npglab/harness.hpp"
#include "npglab/oracles.hpp"
#include "npglab/policy.hpp"
#include "npglab/updates.hpp"
#include "npglab/verify.hpp"

using namespace npglab;

namespace {

std::vector<RunResult> run_all_seeds(const ExperimentSpec& spec, unsigned threads) {
  std::vector<RunResult> results(spec.seeds.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= spec.seeds.size()) return;
      results[i] = run_single(spec, spec.seeds[i], i);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  return results;
}

bool suites_pass(const std::vector<std::string>& names, const std::string& prefix,
                 std::string& detail) {
  std::ostringstream out;
  bool ok = true;
  int used = 0;
  for (const auto& name : names) {
    for (const auto& check : verify_suite(name)) {
      if (!prefix.empty() && check.check.rfind(prefix, 0) != 0) continue;
      ++used;
      if (!check.pass) {
        ok = false;
        out << check.check << " slack=" << check.slack << " FAILED; ";
      }
    }
  }
  if (ok) out << used << " checks, worst-case slacks within tolerance";
  detail = out.str();
  return ok && used > 0;
}

BanditInstance two_point_arms(double r0, double r1) {
  std::vector<RewardDistribution> dists(2);
  dists[0].support = {{r0, 1.0}};
  dists[1].support = {{r1, 1.0}};
  return BanditInstance({r0, r1}, dists, 1.0);
}

// ---- criteria ----------------------------------------------------------

bool criterion_rate_and_monotone(bool check_rate, std::string& detail) {
  auto spec = ExperimentSpec::preset("bandit-uniform-deterministic");
  auto results = run_all_seeds(spec, 2);

  std::uint64_t violations = 0;
  for (const auto& res : results) violations += res.summary.monotonicity_violations;

  const auto& grid = results[0].bandit_rows;
  std::vector<double> t, mean_gap;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    double acc = 0.0;
    for (const auto& res : results) acc += res.bandit_rows[i].gap;
    if (grid[i].t >= 1) {
      t.push_back(static_cast<double>(grid[i].t));
      mean_gap.push_back(acc / static_cast<double>(results.size()));
    }
  }
  auto fit = fit_rate_slope(t, mean_gap, 1e3, 1e6);

  std::ostringstream out;
  if (check_rate) {
    double secant = std::log(mean_gap.back() / mean_gap.front()) /
                    std::log(t.back() / t.front());
    out << "mean-gap log-log slope " << fit.slope << " on [1e3,1e6]"
        << " (target -1 +/- 0.15), r2 " << fit.r2
        << "; full-range secant slope " << secant
        << "; 20 seeds x 1e6 iterations";
    detail = out.str();
    return fit.slope >= -1.15 && fit.slope <= -0.85;
  }
  out << violations << " violations of per-step improvement at 1e-12 across "
      << results.size() << " runs x 1e6 steps";
  detail = out.str();
  return violations == 0;
}

bool criterion_committal(std::string& detail) {
  int super_ok = 0, poly_ok = 0;
  double worst_exponent_lo = 1e9, worst_exponent_hi = -1e9;

  // without a baseline: fixed sampling commits faster than any polynomial
  const double no_baseline_eta[5] = {0.5, 0.75, 1.0, 1.25, 1.5};
  const double no_baseline_r1[2] = {0.5, 0.2};
  for (double eta : no_baseline_eta)
    for (double r1 : no_baseline_r1) {
      auto inst = two_point_arms(1.0, r1);
      UpdateConfig cfg;
      cfg.baseline = false;
      cfg.step = StepSizeRule::constant(eta);
      PolicyParams params(1, 2, 0.0);
      std::vector<double> ts, complement;
      for (int t = 1; t <= 250; ++t) {
        params = step_bandit_fixed_action(params, inst, cfg, 0);
        if (t >= 10) {
          ts.push_back(static_cast<double>(t));
          // tail probability: representable far below 1 - pi(a) precision
          complement.push_back(softmax(params, 0)[1]);
        }
      }
      auto fit = fit_committal_exponent(ts, complement);
      if (fit.model == CommittalModel::kSuperpolynomial) ++super_ok;
    }

  // with the value baseline: decay pinned to the Theta(1/t) boundary
  const double baseline_eta[2] = {0.5, 2.0};
  const double baseline_r1[5] = {0.0, 0.1, 0.2, 0.5, 0.9};
  auto schedule = record_schedule(1000000);
  for (double eta : baseline_eta)
    for (double r1 : baseline_r1) {
      auto inst = two_point_arms(1.0, r1);
      UpdateConfig cfg;
      cfg.baseline = true;
      cfg.step = StepSizeRule::constant(eta);
      PolicyParams params(1, 2, 0.0);
      std::vector<double> ts, complement;
      std::size_t next = 0;
      for (std::uint64_t t = 1; t <= 1000000; ++t) {
        params = step_bandit_fixed_action(params, inst, cfg, 0);
        while (next < schedule.size() && schedule[next] < t) ++next;
        if (next < schedule.size() && schedule[next] == t && t >= 1000) {
          ts.push_back(static_cast<double>(t));
          complement.push_back(1.0 - softmax(params, 0)[0]);
        }
      }
      auto fit = fit_committal_exponent(ts, complement);
      worst_exponent_lo = std::min(worst_exponent_lo, fit.exponent);
      worst_exponent_hi = std::max(worst_exponent_hi, fit.exponent);
      if (fit.model == CommittalModel::kPolynomial && fit.exponent >= 0.8 &&
          fit.exponent <= 1.2)
        ++poly_ok;
    }

  std::ostringstream out;
  out << super_ok << "/10 no-baseline configs superpolynomial; " << poly_ok
      << "/10 baseline configs polynomial with exponent in [" << worst_exponent_lo
      << ", " << worst_exponent_hi << "] (target [0.8, 1.2])";
  detail = out.str();
  return super_ok == 10 && poly_ok == 10;
}

bool criterion_failure_rate(std::string& detail) {
  auto without = ExperimentSpec::preset("bandit-failure-no-baseline");
  auto with = ExperimentSpec::preset("bandit-failure-with-baseline");
  double f_without = failure_rate(without, 1e-3, 2);
  double f_with = failure_rate(with, 1e-3, 2);
  std::ostringstream out;
  out << "failure fraction over 200 seeds: " << f_without
      << " without baseline (needs > 0), " << f_with << " with baseline (needs 0)";
  detail = out.str();
  return f_without > 0.0 && f_with == 0.0;
}

bool criterion_adversarial_escape(std::string& detail) {
  auto spec = ExperimentSpec::preset("bandit-adversarial-stochastic");
  auto results = run_all_seeds(spec, 2);
  double r_star = spec.bandit->mean(spec.bandit->optimal_action());
  bool ok = true;
  double worst_gap = 0.0, min_opt = 1.0;
  int escaped = 0;
  std::ostringstream times;
  for (const auto& res : results) {
    const auto& s = res.summary;
    if (s.failure) ok = false;
    worst_gap = std::max(worst_gap, std::abs(s.final_value - r_star));
    min_opt = std::min(min_opt, s.min_opt_prob);
    if (s.escaped_plateau) {
      ++escaped;
      times << " " << s.escape_time;
    }
    if (std::abs(s.final_value - r_star) > 0.005 || !(s.min_opt_prob > 0.0))
      ok = false;
  }
  std::ostringstream out;
  out << results.size() << " seeds x 2e7 iterations: worst final |pi^T r - r(a*)| = "
      << worst_gap << " (needs <= 0.005), min recorded pi(a*) = " << min_opt
      << " (needs > 0); " << escaped << "/" << results.size()
      << " escaped the plateau (t:" << times.str() << ")";
  detail = out.str();
  return ok;
}

bool criterion_tree(std::string& detail) {
  auto spec = ExperimentSpec::preset("tree-adversarial");
  auto results = run_all_seeds(spec, 1);
  bool ok = true;
  std::ostringstream out;
  for (const auto& res : results) {
    const auto& s = res.summary;
    if (s.failure || s.monotonicity_violations != 0 || !(s.min_opt_prob > 0.0) ||
        !(s.final_gap < 0.01))
      ok = false;
    out << "gap V*(rho)-V(rho) = " << s.final_gap
        << " after 1e7 steps (needs < 0.01), min_s pi(a*(s)|s) = " << s.min_opt_prob
        << " (needs > 0), V-monotonicity violations = " << s.monotonicity_violations;
  }
  detail = out.str();
  return ok;
}

struct Criterion {
  int id;
  const char* title;
  std::function<bool(std::string&)> check;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {1, "O(1/t) convergence rate, uniform init",
       [](std::string& d) { return criterion_rate_and_monotone(true, d); }},
      {2, "almost-sure per-step improvement with baseline",
       [](std::string& d) { return criterion_rate_and_monotone(false, d); }},
      {3, "stochastic NL inequalities (one-state and general)",
       [](std::string& d) { return suites_pass({"lemma1", "lemma3"}, "", d); }},
      {4, "second-moment formulas match enumeration",
       [](std::string& d) { return suites_pass({"variance"}, "variance/", d); }},
      {5, "IS estimates are unbiased",
       [](std::string& d) { return suites_pass({"variance"}, "unbiasedness/", d); }},
      {6, "committal dichotomy under fixed sampling", criterion_committal},
      {7, "failure without baseline, none with baseline", criterion_failure_rate},
      {8, "escape from adversarial initialization", criterion_adversarial_escape},
      {9, "tree MDP: monotone values, persistent exploration, convergence",
       criterion_tree},
      {10, "supporting results: domination, NL coefficient, smoothness, "
           "performance difference, partial products",
       [](std::string& d) {
         return suites_pass(
             {"domination", "nl-coeff", "smoothness", "perf-diff", "products"}, "", d);
       }},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
    if (arg == "--list") {
      for (const auto& c : criteria()) std::printf("%2d  %s\n", c.id, c.title);
      return 0;
    }
  }

  int failures = 0;
  for (const auto& criterion : criteria()) {
    if (only != 0 && criterion.id != only) continue;
    auto start = std::chrono::steady_clock::now();
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.check(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    std::printf("%s criterion %d: %s | %s [%.1fs]\n", ok ? "PASS" : "FAIL",
                criterion.id, criterion.title, detail.c_str(), seconds);
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
