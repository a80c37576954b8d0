#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "npglab/bandit.hpp"
#include "npglab/policy.hpp"
#include "npglab/rng.hpp"

namespace npglab {

// SimplifiedIS observes the true mean r(a_t); StochasticIS observes a
// sampled x_t ~ R_{a_t}.
enum class EstimatorKind { kSimplifiedIS, kStochasticIS };

// Learning-rate schedule. The adaptive rule follows
//   eta_t = scale * pi_t(a_t) * |r(a_t) - pi_t^T r| / denom,
// with denom = 8 * r_max^2 unless overridden (the adversarial-bandit
// experiment uses the literal denominator 9 with scale 1/2).
struct StepSizeRule {
  enum class Kind { kConstant, kAdaptive } kind = Kind::kConstant;
  double eta = 0.1;          // constant rule
  double r_max = 1.0;        // adaptive rule
  double scale = 1.0;        // adaptive rule
  std::optional<double> denominator_override;

  static StepSizeRule constant(double eta);
  static StepSizeRule adaptive(double r_max, double scale = 1.0,
                               std::optional<double> denominator = std::nullopt);

  double denominator() const;
  // Step size for sampled action with probability `prob` and advantage
  // r(a_t) - pi^T r equal to `true_advantage` (true means, even when the
  // observation is noisy).
  double step_size(double prob, double true_advantage) const;
};

struct UpdateConfig {
  EstimatorKind estimator = EstimatorKind::kSimplifiedIS;
  bool baseline = true;
  StepSizeRule step;
  std::uint64_t iterations = 1;
};

// What one bandit step did: sampled action, observation, step size used,
// and pi_t^T r before the update.
struct StepTrace {
  std::size_t action = 0;
  double observation = 0.0;
  double eta = 0.0;
  double expected_reward = 0.0;
};

// IS reward estimate: observed / pi(a_t) at the sampled action, zero
// elsewhere.
std::vector<double> is_estimate(std::span<const double> pi, std::size_t sampled_action,
                                double observed);

// Baseline correction vector: (I{a_t = a}/pi(a) - 1) * b. Its expectation
// over a_t ~ pi is zero.
std::vector<double> baseline_correction(std::span<const double> pi,
                                        std::size_t sampled_action, double b);

// Dense update theta + eta * (r_hat - b_hat); shift-equivalent to the
// sparse rule below (same next policy up to floating-point round-off).
PolicyParams rule_dense_baseline(const PolicyParams& params, std::span<const double> pi,
                                 std::size_t sampled_action, double observed, double b,
                                 double eta);

// Sparse equivalent: theta(a_t) += eta * (observed - b) / pi(a_t).
PolicyParams rule_sparse_baseline(const PolicyParams& params, std::span<const double> pi,
                                  std::size_t sampled_action, double observed, double b,
                                  double eta);

// No-baseline update: theta(a_t) += eta * observed / pi(a_t).
PolicyParams rule_no_baseline(const PolicyParams& params, std::span<const double> pi,
                              std::size_t sampled_action, double observed, double eta);

// One on-policy step: samples a_t ~ pi_t, observes per cfg.estimator,
// applies the configured rule, recenters. Throws NumericalFailure (with t,
// a_t and eta_t in the message) if the logits leave the finite range.
std::pair<PolicyParams, StepTrace> step_bandit(const PolicyParams& params,
                                               const BanditInstance& inst,
                                               const UpdateConfig& cfg, CounterRng& rng,
                                               std::uint64_t t = 0);

// step_bandit with the sampled action forced; SimplifiedIS only. Used for
// committal-rate experiments.
PolicyParams step_bandit_fixed_action(const PolicyParams& params,
                                      const BanditInstance& inst,
                                      const UpdateConfig& cfg,
                                      std::size_t forced_action);

// In-place step on a single-state logit row; the hot path shared by
// step_bandit and the run loop. `pi` must be softmax(logits).
StepTrace step_bandit_row(std::span<double> logits, std::span<const double> pi,
                          const BanditInstance& inst, const UpdateConfig& cfg,
                          CounterRng& rng, std::uint64_t t,
                          std::optional<std::size_t> forced_action = std::nullopt);

}  // namespace npglab
