#include "npglab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "npglab/errors.hpp"
#include "npglab/oracles.hpp"
#include "npglab/rng.hpp"

namespace npglab {
namespace {

constexpr std::uint64_t kSweepSeed = 20240601;

struct Sweep {
  CounterRng rng{kSweepSeed, 0};
  double u() { return rng.uniform(RngStream::kGeneric); }
  double uniform(double lo, double hi) { return lo + (hi - lo) * u(); }
  std::size_t index(std::size_t lo, std::size_t hi) {  // inclusive bounds
    return lo + static_cast<std::size_t>(u() * static_cast<double>(hi - lo + 1));
  }

  std::vector<double> policy(std::size_t k, double logit_range = 5.0) {
    std::vector<double> logits(k), pi(k);
    for (auto& v : logits) v = uniform(-logit_range, logit_range);
    softmax_row(logits, pi);
    return pi;
  }

  std::vector<double> rewards(std::size_t k) {
    std::vector<double> r(k);
    for (auto& v : r) v = u();
    return r;
  }

  // Finite-support instance with exact means: mixtures of mean-preserving
  // two-point spreads around each r(a), support within [-r_max, r_max].
  BanditInstance instance(std::size_t k, double r_max) {
    auto r = rewards(k);
    std::vector<RewardDistribution> dists(k);
    for (std::size_t a = 0; a < k; ++a) {
      std::size_t style = index(0, 2);  // 0: point mass, 1: one pair, 2: two pairs
      if (style == 0) {
        dists[a].support = {{r[a], 1.0}};
        continue;
      }
      auto pair_atoms = [&](double weight) {
        double p = uniform(0.1, 0.9);
        double dmax = std::min((r_max - r[a]) / (1.0 - p), (r_max + r[a]) / p);
        double delta = 0.999 * u() * dmax;
        dists[a].support.push_back({r[a] + delta * (1.0 - p), weight * p});
        dists[a].support.push_back({r[a] - delta * p, weight * (1.0 - p)});
      };
      if (style == 1) {
        pair_atoms(1.0);
      } else {
        double alpha = uniform(0.3, 0.7);
        pair_atoms(alpha);
        pair_atoms(1.0 - alpha);
      }
    }
    return BanditInstance(std::move(r), std::move(dists), r_max, TiePolicy::kAllow);
  }

  std::vector<double> simplex(std::size_t n, double floor_mass = 0.05) {
    std::vector<double> w(n);
    double sum = 0.0;
    for (auto& v : w) {
      v = floor_mass + u();
      sum += v;
    }
    for (auto& v : w) v /= sum;
    return w;
  }

  TabularMdp mdp(std::size_t s_max = 6, std::size_t a_max = 4) {
    std::size_t S = index(2, s_max), A = index(2, a_max);
    std::vector<double> trans(S * A * S), r(S * A);
    for (std::size_t s = 0; s < S; ++s)
      for (std::size_t a = 0; a < A; ++a) {
        auto row = simplex(S);
        for (std::size_t s2 = 0; s2 < S; ++s2) trans[(s * A + a) * S + s2] = row[s2];
        r[s * A + a] = u();
      }
    double gamma = uniform(0.3, 0.95);
    return TabularMdp(S, A, std::move(trans), std::move(r), gamma, simplex(S),
                      simplex(S));
  }

  PolicyParams params(std::size_t S, std::size_t A, double logit_range = 3.0) {
    PolicyParams p(S, A);
    for (auto& v : p.logits) v = uniform(-logit_range, logit_range);
    return p;
  }
};

CheckResult bound_row(const std::string& check, const std::string& params,
                      double min_slack, double tol) {
  return {check, params, min_slack, min_slack >= -tol};
}

CheckResult agreement_row(const std::string& check, const std::string& params,
                          double max_abs_diff, double tol) {
  return {check, params, tol - max_abs_diff, max_abs_diff <= tol};
}

void suite_lemma1(std::vector<CheckResult>& out) {
  Sweep sweep;
  double max_diff = 0.0, min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    std::size_t k = sweep.index(2, 8);
    auto pi = sweep.policy(k);
    auto r = sweep.rewards(k);
    double eta = 2.0 * (1.0 - sweep.u());
    auto rep = exact_progress_simplified(pi, r, eta);
    max_diff = std::max(max_diff,
                        std::abs(brute_force_progress_simplified(pi, r, eta) -
                                 rep.exact_progress));
    min_slack = std::min(min_slack, rep.slack);
  }
  out.push_back(agreement_row("lemma1/closed-vs-brute",
                              "1000 random (pi, r, eta<=2), K<=8", max_diff, 1e-12));
  out.push_back(bound_row("lemma1/part1-bound", "same sweep", min_slack, 1e-10));

  double max_diff2 = 0.0;
  double min_sum_slack = std::numeric_limits<double>::infinity();
  double min_gap_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    std::size_t k = sweep.index(2, 10);
    double r_max = sweep.uniform(1.0, 4.0);
    auto inst = sweep.instance(k, r_max);
    auto pi = sweep.policy(k);
    auto step = StepSizeRule::adaptive(r_max);
    auto rep = exact_progress_stochastic(pi, inst, step);
    max_diff2 = std::max(max_diff2,
                         std::abs(brute_force_progress_stochastic(pi, inst, step) -
                                  rep.exact_progress));
    min_sum_slack = std::min(min_sum_slack, rep.slack);
    min_gap_slack = std::min(min_gap_slack, *rep.secondary_slack);
  }
  out.push_back(agreement_row("lemma1/part2-closed-vs-brute",
                              "200 random finite-support instances, support<=4",
                              max_diff2, 1e-12));
  out.push_back(bound_row("lemma1/part2-sum-bound", "same sweep, adaptive eta scale=1",
                          min_sum_slack, 1e-10));
  out.push_back(bound_row("lemma1/part2-gap-bound", "same sweep, adaptive eta scale=1",
                          min_gap_slack, 1e-10));
}

void suite_lemma3(std::vector<CheckResult>& out) {
  Sweep sweep;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int m = 0; m < 20; ++m) {
    auto mdp = sweep.mdp();
    for (int p = 0; p < 20; ++p) {
      auto params = sweep.params(mdp.num_states(), mdp.num_actions());
      double eta = 2.0 * (1.0 - sweep.u());
      auto rep = exact_progress_mdp(params, mdp, eta);
      min_slack = std::min(min_slack, rep.slack);
    }
  }
  out.push_back(bound_row("lemma3/bound", "20 random MDPs (S<=6) x 20 policies",
                          min_slack, 1e-8));
}

void suite_domination(std::vector<CheckResult>& out) {
  double worst = -std::numeric_limits<double>::infinity();
  for (int pi = 1; pi <= 100; ++pi)
    for (int ei = 1; ei <= 10; ++ei)
      worst = std::max(worst, check_piecewise_domination(pi / 100.0, ei / 10.0, 1001));
  out.push_back(bound_row("domination/grid",
                          "p in {0.01..1}, eps in {0.1..1}, grid 1001", -worst, 1e-12));
}

void suite_nl_coeff(std::vector<CheckResult>& out) {
  Sweep sweep;
  double min_slack = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 10000; ++i) {
    std::size_t k = sweep.index(2, 10);
    auto pi = sweep.policy(k);
    auto r = sweep.rewards(k);
    min_slack = std::min(min_slack, check_nl_coefficient_bound(pi, r));
  }
  out.push_back(bound_row("nl-coeff/bound", "10000 random (pi, r), K<=10", min_slack,
                          1e-12));
}

void suite_variance(std::vector<CheckResult>& out) {
  Sweep sweep;
  double max_var_diff = 0.0, max_var_diff_bl = 0.0;
  double max_bias = 0.0, max_bias_bl = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::size_t k = sweep.index(2, 8);
    auto pi = sweep.policy(k);
    auto r = sweep.rewards(k);
    double b = 0.0, r_sum = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      b += pi[a] * r[a];
      r_sum += r[a];
    }

    // enumeration over a_t of Definition-2 estimates
    std::vector<double> mean_rhat(k, 0.0), mean_diff(k, 0.0);
    double e_sq = 0.0, e_sq_bl = 0.0;
    for (std::size_t at = 0; at < k; ++at) {
      auto r_hat = is_estimate(pi, at, r[at]);
      auto b_hat = baseline_correction(pi, at, b);
      double sq = 0.0, sq_bl = 0.0;
      for (std::size_t a = 0; a < k; ++a) {
        mean_rhat[a] += pi[at] * r_hat[a];
        mean_diff[a] += pi[at] * (r_hat[a] - b_hat[a]);
        sq += r_hat[a] * r_hat[a];
        double diff = r_hat[a] - b_hat[a];
        sq_bl += diff * diff;
      }
      e_sq += pi[at] * sq;
      e_sq_bl += pi[at] * sq_bl;
    }
    for (std::size_t a = 0; a < k; ++a) {
      max_bias = std::max(max_bias, std::abs(mean_rhat[a] - r[a]));
      max_bias_bl = std::max(max_bias_bl, std::abs(mean_diff[a] - r[a]));
    }

    double closed = 0.0, closed_bl = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      closed += r[a] * r[a] / pi[a];
      closed_bl += (r[a] - b) * (r[a] - b) / pi[a];
    }
    closed_bl += -static_cast<double>(k) * b * b + 2.0 * b * r_sum;
    max_var_diff = std::max(max_var_diff, std::abs(closed - e_sq));
    max_var_diff_bl = std::max(max_var_diff_bl, std::abs(closed_bl - e_sq_bl));
  }
  out.push_back(agreement_row("unbiasedness/no-baseline", "100 random (pi, r), K<=8",
                              max_bias, 1e-12));
  out.push_back(agreement_row("unbiasedness/baseline", "same sweep", max_bias_bl,
                              1e-12));
  out.push_back(agreement_row("variance/no-baseline", "closed form vs enumeration",
                              max_var_diff, 1e-10));
  out.push_back(agreement_row("variance/baseline", "closed form vs enumeration",
                              max_var_diff_bl, 1e-10));

  // worked K = 2 case: pi = (1/2, 1/2), r = (1, 1/2)
  {
    std::vector<double> pi = {0.5, 0.5}, r = {1.0, 0.5};
    double e_sq = 0.0, e_sq_bl = 0.0, b = 0.75;
    for (std::size_t at = 0; at < 2; ++at) {
      auto r_hat = is_estimate(pi, at, r[at]);
      auto b_hat = baseline_correction(pi, at, b);
      for (std::size_t a = 0; a < 2; ++a) {
        e_sq += pi[at] * r_hat[a] * r_hat[a];
        double diff = r_hat[a] - b_hat[a];
        e_sq_bl += pi[at] * diff * diff;
      }
    }
    double diff = std::max(std::abs(e_sq - 2.5), std::abs(e_sq_bl - 1.375));
    out.push_back(agreement_row("variance/worked-case",
                                "pi=(.5,.5), r=(1,.5): E|r|^2=2.5, E|r-b|^2=1.375",
                                diff, 1e-12));
  }
}

void suite_smoothness(std::vector<CheckResult>& out) {
  Sweep sweep;
  double worst = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    std::size_t k = sweep.index(2, 8);
    PolicyParams theta(1, k);
    for (auto& v : theta.logits) v = sweep.uniform(-5.0, 5.0);
    std::vector<double> delta(k);
    double norm_sq = 0.0;
    for (auto& v : delta) {
      v = sweep.uniform(-1.0, 1.0);
      norm_sq += v * v;
    }
    double scale = sweep.u() / std::max(1.0, std::sqrt(norm_sq));
    norm_sq = 0.0;
    for (auto& v : delta) {
      v *= scale;
      norm_sq += v * v;
    }
    PolicyParams theta2 = theta;
    for (std::size_t a = 0; a < k; ++a) theta2.logits[a] += delta[a];

    auto pi = softmax(theta, 0);
    auto pi2 = softmax(theta2, 0);
    PolicyVector pv(1, k);
    pv.probs = pi;
    std::size_t action = sweep.index(0, k - 1);
    auto grad = policy_jacobian_row(pv, 0, action);
    double lin = 0.0;
    for (std::size_t a = 0; a < k; ++a) lin += grad[a] * delta[a];
    double remainder = std::abs(pi2[action] - pi[action] - lin);
    worst = std::max(worst, remainder - 0.75 * norm_sq);
  }
  out.push_back(bound_row("smoothness/three-halves",
                          "1000 random (theta, theta'), |delta| <= 1", -worst, 1e-10));
}

void suite_perf_diff(std::vector<CheckResult>& out) {
  Sweep sweep;
  double max_err = 0.0;
  for (int m = 0; m < 20; ++m) {
    auto mdp = sweep.mdp(6, 4);
    for (int p = 0; p < 5; ++p) {
      PolicyVector pi = softmax_all(sweep.params(mdp.num_states(), mdp.num_actions()));
      PolicyVector pi2 = softmax_all(sweep.params(mdp.num_states(), mdp.num_actions()));
      auto bundle = evaluate_policy(mdp, pi);
      auto bundle2 = evaluate_policy(mdp, pi2);
      double lhs = bundle2.value_at(mdp.rho()) - bundle.value_at(mdp.rho());
      // d_rho^{pi'}: visitation of pi2 with the start distribution swapped to rho
      std::vector<double> d_rho;
      {
        nlohmann::json j = nlohmann::json::parse(mdp.to_json());
        j["mu"] = mdp.rho();
        auto shifted = TabularMdp::from_json(j.dump());
        d_rho = evaluate_policy(shifted, pi2).d_mu;
      }
      double rhs = 0.0;
      for (std::size_t s = 0; s < mdp.num_states(); ++s) {
        double inner = 0.0;
        for (std::size_t a = 0; a < mdp.num_actions(); ++a)
          inner += (pi2.at(s, a) - pi.at(s, a)) * bundle.q[s * mdp.num_actions() + a];
        rhs += d_rho[s] * inner;
      }
      rhs /= 1.0 - mdp.gamma();
      max_err = std::max(max_err, std::abs(lhs - rhs));
    }
  }
  out.push_back(agreement_row("perf-diff/identity",
                              "20 random MDPs (S<=6, A<=4), 5 policy pairs each",
                              max_err, 1e-8));
}

void suite_products(std::vector<CheckResult>& out) {
  // complements 1/t^2 are summable: the product stays bounded away from 0
  std::vector<double> probs;
  probs.reserve(999999);
  for (std::uint64_t t = 2; t <= 1000000; ++t)
    probs.push_back(1.0 - 1.0 / (static_cast<double>(t) * static_cast<double>(t)));
  auto [prod, sum] = partial_product_analysis(probs);
  bool pass = prod > 0.4 && std::abs(sum - 0.6449330668487417) < 1e-9;
  out.push_back({"products/summable-complements",
                 "probs(t)=1-1/t^2, t=2..1e6 (sum -> pi^2/6 - 1)", prod - 0.4, pass});

  // complements 1/(t+1) diverge: the product telescopes to 0
  probs.clear();
  for (std::uint64_t t = 1; t <= 1000000; ++t)
    probs.push_back(1.0 - 1.0 / (static_cast<double>(t) + 1.0));
  auto [prod2, sum2] = partial_product_analysis(probs);
  double expected = 1.0 / 1000001.0;
  bool pass2 = std::abs(prod2 - expected) < 1e-12 && sum2 > 10.0;
  out.push_back({"products/divergent-complements",
                 "probs(t)=1-1/(t+1), t=1..1e6 (telescoping)",
                 1e-12 - std::abs(prod2 - expected), pass2});
}

}  // namespace

std::vector<CheckResult> verify_suite(const std::string& suite) {
  std::vector<CheckResult> out;
  bool all = suite == "all";
  bool known = all;
  if (all || suite == "lemma1") suite_lemma1(out), known = true;
  if (all || suite == "lemma3") suite_lemma3(out), known = true;
  if (all || suite == "domination") suite_domination(out), known = true;
  if (all || suite == "nl-coeff") suite_nl_coeff(out), known = true;
  if (all || suite == "variance") suite_variance(out), known = true;
  if (all || suite == "smoothness") suite_smoothness(out), known = true;
  if (all || suite == "perf-diff") suite_perf_diff(out), known = true;
  if (all || suite == "products") suite_products(out), known = true;
  if (!known) throw InvalidArgument("unknown verify suite '" + suite + "'");
  return out;
}

std::string report_to_json(const std::vector<CheckResult>& results) {
  auto arr = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json j;
    j["check"] = r.check;
    j["params"] = r.params;
    j["slack"] = r.slack;
    j["pass"] = r.pass;
    arr.push_back(j);
  }
  return arr.dump(2);
}

}  // namespace npglab
