#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace npglab {

// Softmax policy logits over (state, action). One-state problems use
// states == 1. Stored row-major, one row per state.
struct PolicyParams {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> logits;

  PolicyParams() = default;
  PolicyParams(std::size_t s, std::size_t a, double fill = 0.0)
      : states(s), actions(a), logits(s * a, fill) {}

  double& at(std::size_t s, std::size_t a) { return logits[s * actions + a]; }
  double at(std::size_t s, std::size_t a) const { return logits[s * actions + a]; }
  std::span<double> row(std::size_t s) { return {logits.data() + s * actions, actions}; }
  std::span<const double> row(std::size_t s) const {
    return {logits.data() + s * actions, actions};
  }
  bool finite() const;
};

// Per-state probability tables induced by softmax over logits.
struct PolicyVector {
  std::size_t states = 0;
  std::size_t actions = 0;
  std::vector<double> probs;

  PolicyVector() = default;
  PolicyVector(std::size_t s, std::size_t a) : states(s), actions(a), probs(s * a, 0.0) {}

  double& at(std::size_t s, std::size_t a) { return probs[s * actions + a]; }
  double at(std::size_t s, std::size_t a) const { return probs[s * actions + a]; }
  std::span<double> row(std::size_t s) { return {probs.data() + s * actions, actions}; }
  std::span<const double> row(std::size_t s) const {
    return {probs.data() + s * actions, actions};
  }

  // Checks the type invariants: entries strictly inside (0, 1) and each row
  // summing to one within 1e-12. Throws NumericalFailure otherwise.
  void validate() const;
};

// Max-subtracted softmax of one logit row, written into `out`.
// Logit spreads up to ~700 are handled without overflow.
void softmax_row(std::span<const double> logits, std::span<double> out);

// Softmax of a single state's logits.
std::vector<double> softmax(const PolicyParams& params, std::size_t state);

// Softmax of every state's logits.
PolicyVector softmax_all(const PolicyParams& params);

// Gradient of pi(action | state) with respect to that state's logits:
// entry j is pi(a) * (delta_{aj} - pi(j)).
std::vector<double> policy_jacobian_row(const PolicyVector& pi, std::size_t state,
                                        std::size_t action);

// Subtracts the per-state mean so each row of logits sums to zero. The
// induced policy is unchanged (softmax is shift invariant).
PolicyParams recenter(const PolicyParams& params);
void recenter_row_inplace(std::span<double> logits);

}  // namespace npglab
