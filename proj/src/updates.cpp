#include "npglab/updates.hpp"

#include <cmath>
#include <string>

#include "npglab/errors.hpp"

namespace npglab {

StepSizeRule StepSizeRule::constant(double eta) {
  if (!(eta > 0.0)) throw InvalidArgument("StepSizeRule: eta must be positive");
  StepSizeRule r;
  r.kind = Kind::kConstant;
  r.eta = eta;
  return r;
}

StepSizeRule StepSizeRule::adaptive(double r_max, double scale,
                                    std::optional<double> denominator) {
  if (!(r_max > 0.0) || !(scale > 0.0))
    throw InvalidArgument("StepSizeRule: r_max and scale must be positive");
  if (denominator && !(*denominator > 0.0))
    throw InvalidArgument("StepSizeRule: denominator must be positive");
  StepSizeRule r;
  r.kind = Kind::kAdaptive;
  r.r_max = r_max;
  r.scale = scale;
  r.denominator_override = denominator;
  return r;
}

double StepSizeRule::denominator() const {
  return denominator_override ? *denominator_override : 8.0 * r_max * r_max;
}

double StepSizeRule::step_size(double prob, double true_advantage) const {
  if (kind == Kind::kConstant) return eta;
  return scale * prob * std::abs(true_advantage) / denominator();
}

std::vector<double> is_estimate(std::span<const double> pi, std::size_t sampled_action,
                                double observed) {
  if (sampled_action >= pi.size()) throw InvalidArgument("is_estimate: action index");
  if (!(pi[sampled_action] > 0.0))
    throw NumericalFailure("is_estimate: sampled action has zero probability");
  std::vector<double> r_hat(pi.size(), 0.0);
  r_hat[sampled_action] = observed / pi[sampled_action];
  return r_hat;
}

std::vector<double> baseline_correction(std::span<const double> pi,
                                        std::size_t sampled_action, double b) {
  if (sampled_action >= pi.size())
    throw InvalidArgument("baseline_correction: action index");
  std::vector<double> b_hat(pi.size(), -b);
  b_hat[sampled_action] = (1.0 / pi[sampled_action] - 1.0) * b;
  return b_hat;
}

PolicyParams rule_dense_baseline(const PolicyParams& params, std::span<const double> pi,
                                 std::size_t sampled_action, double observed, double b,
                                 double eta) {
  if (params.states != 1 || params.actions != pi.size())
    throw InvalidArgument("rule_dense_baseline: params must be 1 x K");
  auto r_hat = is_estimate(pi, sampled_action, observed);
  auto b_hat = baseline_correction(pi, sampled_action, b);
  PolicyParams out = params;
  for (std::size_t a = 0; a < pi.size(); ++a)
    out.logits[a] += eta * (r_hat[a] - b_hat[a]);
  return out;
}

PolicyParams rule_sparse_baseline(const PolicyParams& params, std::span<const double> pi,
                                  std::size_t sampled_action, double observed, double b,
                                  double eta) {
  if (params.states != 1 || params.actions != pi.size())
    throw InvalidArgument("rule_sparse_baseline: params must be 1 x K");
  PolicyParams out = params;
  out.logits[sampled_action] += eta * ((observed - b) / pi[sampled_action]);
  return out;
}

PolicyParams rule_no_baseline(const PolicyParams& params, std::span<const double> pi,
                              std::size_t sampled_action, double observed, double eta) {
  if (params.states != 1 || params.actions != pi.size())
    throw InvalidArgument("rule_no_baseline: params must be 1 x K");
  PolicyParams out = params;
  out.logits[sampled_action] += eta * (observed / pi[sampled_action]);
  return out;
}

StepTrace step_bandit_row(std::span<double> logits, std::span<const double> pi,
                          const BanditInstance& inst, const UpdateConfig& cfg,
                          CounterRng& rng, std::uint64_t t,
                          std::optional<std::size_t> forced_action) {
  StepTrace trace;
  if (forced_action) {
    if (cfg.estimator != EstimatorKind::kSimplifiedIS)
      throw InvalidArgument("fixed-action stepping requires SimplifiedIS");
    trace.action = *forced_action;
  } else {
    trace.action = sample_categorical(pi, rng.uniform(RngStream::kAction));
  }

  double b = expected_reward(inst, pi);
  trace.expected_reward = b;
  trace.observation = cfg.estimator == EstimatorKind::kStochasticIS
                          ? sample_reward(inst, trace.action, rng)
                          : inst.mean(trace.action);
  double prob = pi[trace.action];
  trace.eta = cfg.step.step_size(prob, inst.mean(trace.action) - b);

  if (cfg.baseline)
    logits[trace.action] += trace.eta * ((trace.observation - b) / prob);
  else
    logits[trace.action] += trace.eta * (trace.observation / prob);
  recenter_row_inplace(logits);

  for (double v : logits)
    if (!std::isfinite(v))
      throw NumericalFailure("step_bandit: non-finite logits at t=" +
                             std::to_string(t) + " a_t=" + std::to_string(trace.action) +
                             " eta_t=" + std::to_string(trace.eta));
  return trace;
}

std::pair<PolicyParams, StepTrace> step_bandit(const PolicyParams& params,
                                               const BanditInstance& inst,
                                               const UpdateConfig& cfg, CounterRng& rng,
                                               std::uint64_t t) {
  if (params.states != 1 || params.actions != inst.num_actions())
    throw InvalidArgument("step_bandit: params must be 1 x K");
  if (!params.finite()) throw NumericalFailure("step_bandit: non-finite logits");
  PolicyParams out = params;
  auto pi = softmax(out, 0);
  StepTrace trace = step_bandit_row(out.row(0), pi, inst, cfg, rng, t);
  return {std::move(out), trace};
}

PolicyParams step_bandit_fixed_action(const PolicyParams& params,
                                      const BanditInstance& inst,
                                      const UpdateConfig& cfg,
                                      std::size_t forced_action) {
  if (params.states != 1 || params.actions != inst.num_actions())
    throw InvalidArgument("step_bandit_fixed_action: params must be 1 x K");
  if (forced_action >= inst.num_actions())
    throw InvalidArgument("step_bandit_fixed_action: action index");
  PolicyParams out = params;
  auto pi = softmax(out, 0);
  CounterRng unused(0, 0);
  step_bandit_row(out.row(0), pi, inst, cfg, unused, 0, forced_action);
  return out;
}

}  // namespace npglab
