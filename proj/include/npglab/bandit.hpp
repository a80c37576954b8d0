#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "npglab/rng.hpp"

namespace npglab {

// Finite-support reward distribution for one action. Finite support keeps
// every expectation over observations exactly enumerable.
struct RewardDistribution {
  struct Atom {
    double value = 0.0;
    double prob = 0.0;
  };
  std::vector<Atom> support;

  double mean() const;
};

enum class TiePolicy { kReject, kAllow };

// One-state MDP: true means r in [0,1]^K plus bounded sampling
// distributions. Immutable after construction.
class BanditInstance {
 public:
  // Validates: means in [0,1], per-action distribution mean equal to r(a)
  // within 1e-12, probabilities positive and normalized, support within
  // [-r_max, r_max]. With TiePolicy::kReject the argmax of r must be unique
  // (reward gap > 0); oracle-only instances may allow ties.
  BanditInstance(std::vector<double> means, std::vector<RewardDistribution> dists,
                 double r_max, TiePolicy ties = TiePolicy::kReject);

  std::size_t num_actions() const { return means_.size(); }
  std::span<const double> means() const { return means_; }
  double mean(std::size_t a) const { return means_[a]; }
  const RewardDistribution& dist(std::size_t a) const { return dists_[a]; }
  double r_max() const { return r_max_; }

  std::size_t optimal_action() const { return optimal_action_; }
  // r(a*) - max_{a != a*} r(a); zero when the argmax ties (oracle instances).
  double reward_gap() const { return reward_gap_; }

  std::string to_json() const;
  static BanditInstance from_json(const std::string& json,
                                  TiePolicy ties = TiePolicy::kReject);

 private:
  std::vector<double> means_;
  std::vector<RewardDistribution> dists_;
  double r_max_;
  std::size_t optimal_action_ = 0;
  double reward_gap_ = 0.0;
};

// Draws one reward observation for `action` from its finite support.
double sample_reward(const BanditInstance& inst, std::size_t action, CounterRng& rng);

// pi^T r for a one-state policy.
double expected_reward(const BanditInstance& inst, std::span<const double> pi);

// The 20-action instance used throughout the experiments: two-point reward
// distributions at r(a)-3 and r(a)+3 with probability 1/2 each, R_max = 4
// (tightest round bound covering the support, which lies in (-3, 4)).
const BanditInstance& benchmark_bandit_instance();

}  // namespace npglab
