#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "npglab/bandit.hpp"
#include "npglab/mdp.hpp"
#include "npglab/policy.hpp"
#include "npglab/updates.hpp"

namespace npglab {

// One-step expected progress against the applicable lower bound. Bounds are
// functions of the current policy and rewards only; the slack is guaranteed
// non-negative when the preconditions of the corresponding result hold.
struct ProgressReport {
  double exact_progress = 0.0;
  double nl_bound = 0.0;
  double slack = 0.0;
  std::vector<double> per_action_terms;
  // Weaker gap-based bound (stochastic-reward case only).
  std::optional<double> secondary_bound;
  std::optional<double> secondary_slack;
};

// E_t[pi_{t+1}^T r] - pi_t^T r for the baseline update with true-mean
// observations and constant eta, via the closed form
//   sum_i pi(i) * [(e^{y_i} - 1)(r(i) - b)] / [e^{y_i} + (1-pi(i))/pi(i)],
// y_i = eta (r(i) - b)/pi(i), b = pi^T r. Cross-checked against the
// brute-force route below; disagreement beyond 1e-12 throws. nl_bound is
// eta/(1+eta) * pi(a*) * (r(a*) - b)^2.
ProgressReport exact_progress_simplified(std::span<const double> pi,
                                         std::span<const double> r, double eta);

// Independent route: applies the sparse update in logit space for each
// candidate a_t and averages the resulting pi_{t+1}^T r over a_t ~ pi.
double brute_force_progress_simplified(std::span<const double> pi,
                                       std::span<const double> r, double eta);

// Expected progress with sampled rewards: exact enumeration over all
// (action, support atom) pairs, with the per-sample step size taken from
// `step`. nl_bound is the 1/(16 R^2) sum-form bound; secondary_bound the
// Delta/(K-1) gap form. Both hold when step is the adaptive rule at
// scale 1 with denominator 8 R_max^2.
ProgressReport exact_progress_stochastic(std::span<const double> pi,
                                         const BanditInstance& inst,
                                         const StepSizeRule& step);

// Logit-space enumeration route for the stochastic case.
double brute_force_progress_stochastic(std::span<const double> pi,
                                       const BanditInstance& inst,
                                       const StepSizeRule& step);

// Expected progress of one Algorithm-1 step: enumerates all S*A candidate
// (s_t, a_t) pairs weighted by d_mu(s) pi(a|s), re-solving the value
// system for each candidate next policy. nl_bound per the general
// stochastic NL inequality.
ProgressReport exact_progress_mdp(const PolicyParams& params, const TabularMdp& mdp,
                                  double eta);

// Piecewise-linear envelope check for f_p(y) = (e^y - 1)/(e^y + (1-p)/p):
// (1-eps) p y <= f <= (1+eps) p y on [0, eps] and the reversed pair on
// [-eps, 0], on a uniform grid per interval. Returns the worst signed
// violation (<= 0 means the envelope holds everywhere on the grid).
double check_piecewise_domination(double p, double eps, std::size_t grid);

// LHS - RHS of
//   sum_i pi(i)^2 |r(i) - pi^T r|^3 >= Delta/(K-1) pi(a*)^2 (r(a*)-pi^T r)^2.
// Requires a unique argmax of r (DegenerateInstance otherwise).
double check_nl_coefficient_bound(std::span<const double> pi,
                                  std::span<const double> r);

// Partial product of probs and partial sum of their complements. A
// summable complement series keeps the product bounded away from zero
// ("bad sampling"); a divergent one drives it to zero ("good sampling").
std::pair<double, double> partial_product_analysis(std::span<const double> probs);

// Stable evaluation of [(e^y - 1) / (e^y + (1-p)/p)] * gap.
double sigmoid_progress_term(double p, double y, double gap);

}  // namespace npglab
