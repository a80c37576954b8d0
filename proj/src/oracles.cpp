#include "npglab/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "npglab/errors.hpp"

namespace npglab {
namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::size_t argmax(std::span<const double> r) {
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

// pi_{t+1}^T r after the sparse baseline update theta(i) += y * pi(i)...
// evaluated in logit space from theta = log(pi); used as the independent
// route against the closed forms.
double next_expected_reward(std::span<const double> pi, std::span<const double> r,
                            std::size_t i, double delta_logit) {
  std::vector<double> logits(pi.size());
  for (std::size_t a = 0; a < pi.size(); ++a) logits[a] = std::log(pi[a]);
  logits[i] += delta_logit;
  std::vector<double> next(pi.size());
  softmax_row(logits, next);
  return dot(next, r);
}

void validate_policy_vector(std::span<const double> pi) {
  double sum = 0.0;
  for (double p : pi) {
    if (!(p > 0.0 && p < 1.0 + 1e-12))
      throw InvalidArgument("oracle: policy entries must lie in (0,1)");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgument("oracle: policy does not sum to 1");
}

}  // namespace

double sigmoid_progress_term(double p, double y, double gap) {
  if (y <= 0.0) {
    double ey = std::exp(y);
    return (ey - 1.0) * gap / (ey + (1.0 - p) / p);
  }
  // Multiply through by e^{-y} so large positive y cannot overflow.
  double emy = std::exp(-y);
  return (1.0 - emy) * gap / (1.0 + emy * (1.0 - p) / p);
}

double brute_force_progress_simplified(std::span<const double> pi,
                                       std::span<const double> r, double eta) {
  double b = dot(pi, r);
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i)
    acc += pi[i] * (next_expected_reward(pi, r, i, eta * (r[i] - b) / pi[i]) - b);
  return acc;
}

ProgressReport exact_progress_simplified(std::span<const double> pi,
                                         std::span<const double> r, double eta) {
  if (pi.size() != r.size())
    throw InvalidArgument("exact_progress_simplified: dimension mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("exact_progress_simplified: eta <= 0");
  validate_policy_vector(pi);

  ProgressReport rep;
  double b = dot(pi, r);
  rep.per_action_terms.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double gap = r[i] - b;
    rep.per_action_terms[i] = pi[i] * sigmoid_progress_term(pi[i], eta * gap / pi[i], gap);
    rep.exact_progress += rep.per_action_terms[i];
  }

  double brute = brute_force_progress_simplified(pi, r, eta);
  if (std::abs(brute - rep.exact_progress) > 1e-12)
    throw NumericalFailure("exact_progress_simplified: closed form and brute force "
                           "disagree by " +
                           std::to_string(brute - rep.exact_progress));

  std::size_t a_star = argmax(r);
  double star_gap = r[a_star] - b;
  rep.nl_bound = eta / (1.0 + eta) * pi[a_star] * star_gap * star_gap;
  rep.slack = rep.exact_progress - rep.nl_bound;
  return rep;
}

ProgressReport exact_progress_stochastic(std::span<const double> pi,
                                         const BanditInstance& inst,
                                         const StepSizeRule& step) {
  if (pi.size() != inst.num_actions())
    throw InvalidArgument("exact_progress_stochastic: dimension mismatch");
  validate_policy_vector(pi);

  ProgressReport rep;
  double b = expected_reward(inst, pi);
  rep.per_action_terms.resize(pi.size());
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double gap = inst.mean(i) - b;
    double eta_i = step.step_size(pi[i], gap);
    double term = 0.0;
    for (const auto& atom : inst.dist(i).support)
      term += atom.prob * sigmoid_progress_term(pi[i], eta_i * (atom.value - b) / pi[i], gap);
    rep.per_action_terms[i] = pi[i] * term;
    rep.exact_progress += rep.per_action_terms[i];
  }

  double r2 = inst.r_max() * inst.r_max();
  double sum_form = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double gap = std::abs(inst.mean(i) - b);
    sum_form += pi[i] * pi[i] * gap * gap * gap;
  }
  rep.nl_bound = sum_form / (16.0 * r2);
  rep.slack = rep.exact_progress - rep.nl_bound;

  std::size_t a_star = inst.optimal_action();
  double star_gap = inst.mean(a_star) - b;
  double k = static_cast<double>(inst.num_actions());
  rep.secondary_bound = inst.reward_gap() / (16.0 * r2 * (k - 1.0)) * pi[a_star] *
                        pi[a_star] * star_gap * star_gap;
  rep.secondary_slack = rep.exact_progress - *rep.secondary_bound;
  return rep;
}

double brute_force_progress_stochastic(std::span<const double> pi,
                                       const BanditInstance& inst,
                                       const StepSizeRule& step) {
  double b = expected_reward(inst, pi);
  double acc = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double eta_i = step.step_size(pi[i], inst.mean(i) - b);
    for (const auto& atom : inst.dist(i).support) {
      double next = next_expected_reward(pi, inst.means(), i,
                                         eta_i * (atom.value - b) / pi[i]);
      acc += pi[i] * atom.prob * (next - b);
    }
  }
  return acc;
}

ProgressReport exact_progress_mdp(const PolicyParams& params, const TabularMdp& mdp,
                                  double eta) {
  if (params.states != mdp.num_states() || params.actions != mdp.num_actions())
    throw InvalidArgument("exact_progress_mdp: dimension mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("exact_progress_mdp: eta <= 0");

  const std::size_t S = mdp.num_states(), A = mdp.num_actions();
  PolicyVector pi = softmax_all(params);
  ValueBundle bundle = evaluate_policy(mdp, pi);
  double v_mu = bundle.value_at(mdp.mu());

  ProgressReport rep;
  rep.per_action_terms.assign(S * A, 0.0);
  PolicyVector candidate = pi;
  std::vector<double> row_logits(A);
  for (std::size_t s = 0; s < S; ++s) {
    for (std::size_t a = 0; a < A; ++a) {
      double prob = pi.at(s, a);
      for (std::size_t j = 0; j < A; ++j) row_logits[j] = params.at(s, j);
      row_logits[a] += eta * (bundle.adv[s * A + a] / prob);
      softmax_row(row_logits, candidate.row(s));
      ValueBundle next = evaluate_policy(mdp, candidate);
      double weight = bundle.d_mu[s] * prob;
      rep.per_action_terms[s * A + a] = weight * (next.value_at(mdp.mu()) - v_mu);
      rep.exact_progress += rep.per_action_terms[s * A + a];
    }
    // restore the candidate row before moving to the next state
    for (std::size_t j = 0; j < A; ++j) candidate.at(s, j) = pi.at(s, j);
  }

  auto [pi_star, star_bundle] = optimal_policy(mdp);
  auto opt = greedy_actions(pi_star);
  double min_opt = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < S; ++s) min_opt = std::min(min_opt, pi.at(s, opt[s]));
  double ratio = 0.0;
  for (std::size_t s = 0; s < S; ++s)
    ratio = std::max(ratio, star_bundle.d_mu[s] / mdp.mu()[s]);
  double one_minus_gamma = 1.0 - mdp.gamma();
  double star_gap = star_bundle.value_at(mdp.mu()) - v_mu;
  rep.nl_bound = eta * std::pow(one_minus_gamma, 4) * mdp.min_mu() / (1.0 + eta) /
                 ratio * (min_opt * min_opt) / static_cast<double>(S) * star_gap *
                 star_gap;
  rep.slack = rep.exact_progress - rep.nl_bound;
  return rep;
}

double check_piecewise_domination(double p, double eps, std::size_t grid) {
  if (!(p > 0.0 && p <= 1.0))
    throw InvalidArgument("check_piecewise_domination: p must be in (0,1]");
  if (!(eps >= 0.0 && eps <= 1.0))
    throw InvalidArgument("check_piecewise_domination: eps must be in [0,1]");
  if (grid < 2) throw InvalidArgument("check_piecewise_domination: grid must be >= 2");

  auto f = [p](double y) { return sigmoid_progress_term(p, y, 1.0); };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < grid; ++k) {
    double frac = static_cast<double>(k) / static_cast<double>(grid - 1);
    double y = eps * frac;
    double lower = (1.0 - eps) * p * y, upper = (1.0 + eps) * p * y;
    worst = std::max({worst, lower - f(y), f(y) - upper});
    y = -eps + eps * frac;
    lower = (1.0 + eps) * p * y;
    upper = (1.0 - eps) * p * y;
    worst = std::max({worst, lower - f(y), f(y) - upper});
  }
  return worst;
}

double check_nl_coefficient_bound(std::span<const double> pi,
                                  std::span<const double> r) {
  if (pi.size() != r.size() || pi.size() < 2)
    throw InvalidArgument("check_nl_coefficient_bound: bad dimensions");
  std::size_t a_star = argmax(r);
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < r.size(); ++a)
    if (a != a_star) best_other = std::max(best_other, r[a]);
  if (!(r[a_star] > best_other))
    throw DegenerateInstance("check_nl_coefficient_bound: tied argmax of r");

  double b = dot(pi, r);
  double lhs = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    double gap = std::abs(r[i] - b);
    lhs += pi[i] * pi[i] * gap * gap * gap;
  }
  double delta = r[a_star] - best_other;
  double star_gap = r[a_star] - b;
  double rhs = delta / static_cast<double>(pi.size() - 1) * pi[a_star] * pi[a_star] *
               star_gap * star_gap;
  return lhs - rhs;
}

std::pair<double, double> partial_product_analysis(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("partial_product_analysis: empty sequence");
  double product = 1.0, complement_sum = 0.0;
  for (double p : probs) {
    if (!(p > 0.0 && p < 1.0))
      throw InvalidArgument("partial_product_analysis: entries must be in (0,1)");
    product *= p;
    complement_sum += 1.0 - p;
  }
  return {product, complement_sum};
}

}  // namespace npglab
