#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "npglab/policy.hpp"
#include "npglab/rng.hpp"

namespace npglab {

// Finite MDP (S, A, r, P, gamma) with initial distribution mu (used for
// state sampling, min_s mu(s) > 0 required) and evaluation distribution
// rho. Immutable after construction.
class TabularMdp {
 public:
  // trans is S*A*S row-major P(s'|s,a); r is S*A in [0,1].
  TabularMdp(std::size_t S, std::size_t A, std::vector<double> trans,
             std::vector<double> r, double gamma, std::vector<double> mu,
             std::vector<double> rho);

  std::size_t num_states() const { return S_; }
  std::size_t num_actions() const { return A_; }
  double gamma() const { return gamma_; }
  double reward(std::size_t s, std::size_t a) const { return r_[s * A_ + a]; }
  double trans(std::size_t s, std::size_t a, std::size_t s2) const {
    return trans_[(s * A_ + a) * S_ + s2];
  }
  const std::vector<double>& mu() const { return mu_; }
  const std::vector<double>& rho() const { return rho_; }
  double min_mu() const { return min_mu_; }

  // Nonzero transitions of (s,a) as (next state, probability) pairs.
  struct Edge {
    std::uint32_t next;
    double prob;
  };
  const std::vector<Edge>& edges(std::size_t s, std::size_t a) const {
    return edges_[s * A_ + a];
  }

  // Topological order of the cross-state transition graph when it is
  // acyclic apart from self-loops (trees, chains); empty otherwise.
  // Lets policy evaluation run as one exact sweep instead of an LU solve.
  const std::vector<std::uint32_t>& topo_order() const { return topo_; }
  bool has_dag_structure() const { return !topo_.empty(); }

  // Incoming cross-state edges of s as (source state, action, probability).
  struct InEdge {
    std::uint32_t from;
    std::uint32_t action;
    double prob;
  };
  const std::vector<InEdge>& in_edges(std::size_t s) const { return in_edges_[s]; }

  std::string to_json() const;
  static TabularMdp from_json(const std::string& json);

 private:
  std::size_t S_, A_;
  std::vector<double> trans_, r_;
  double gamma_;
  std::vector<double> mu_, rho_;
  double min_mu_ = 0.0;
  std::vector<std::vector<Edge>> edges_;
  std::vector<std::vector<InEdge>> in_edges_;
  std::vector<std::uint32_t> topo_;
};

// V, Q, advantage and discounted visitation d_mu for one policy.
struct ValueBundle {
  std::vector<double> v;     // S
  std::vector<double> q;     // S*A
  std::vector<double> adv;   // S*A
  std::vector<double> d_mu;  // S

  double value_at(const std::vector<double>& dist) const;
};

// Exact policy evaluation: V from (I - gamma P_pi) V = r_pi, Q from one
// Bellman backup, d_mu from (I - gamma P_pi^T) d = (1-gamma) mu. Uses the
// one-sweep solver on DAG-structured models, dense LU otherwise; both are
// direct solves with residuals <= 1e-10 (SolveFailure if not attained).
ValueBundle evaluate_policy(const TabularMdp& mdp, const PolicyVector& pi);

// Value iteration to 1e-12 span seminorm, then greedy (ties to the lowest
// action index). Returns the deterministic one-hot policy and its bundle.
std::pair<PolicyVector, ValueBundle> optimal_policy(const TabularMdp& mdp);

std::vector<std::size_t> greedy_actions(const PolicyVector& pi_star);

// Complete tree of the given depth/branch factor in heap order (root 0).
// Action j in a non-leaf state moves deterministically to its j-th child;
// leaves self-loop under every action; every state shares the same reward
// vector. mu puts mu_root_mass on the root and spreads the rest uniformly;
// rho is a point mass at the root.
TabularMdp tree_mdp(std::size_t depth, std::size_t branch,
                    const std::vector<double>& rewards, double gamma,
                    double mu_root_mass);

// Logits with pi(a*(s)|s) = opt_prob in every state and the remaining mass
// uniform over the suboptimal actions. opt_prob in (0, 1/A].
PolicyParams adversarial_tree_init(const TabularMdp& mdp, double opt_prob);

struct MdpStepTrace {
  std::size_t state = 0;
  std::size_t action = 0;
  double v_mu = 0.0;
  double v_rho = 0.0;
  double min_pi_opt = 0.0;  // NaN when optimal actions are not supplied
  double eta = 0.0;
};

// One Algorithm-1 step: s_t ~ d_mu^{pi_t}, a_t ~ pi_t(.|s_t), then
// theta(s_t,a_t) += eta * (Q(s_t,a_t) - V(s_t)) / pi_t(a_t|s_t), recenter
// that state's row. Values are exact (no estimation).
std::pair<PolicyParams, MdpStepTrace> step_algorithm1(
    const PolicyParams& params, const TabularMdp& mdp, double eta, CounterRng& rng,
    std::uint64_t t = 0, const std::vector<std::size_t>* opt_actions = nullptr);

// Long-run driver for Algorithm 1. Keeps pi/V/d incrementally consistent
// and checks the almost-sure per-step monotonicity of V at every state.
class Algorithm1Run {
 public:
  Algorithm1Run(const TabularMdp& mdp, PolicyParams init, double eta,
                std::uint64_t seed, std::uint64_t run_id);

  MdpStepTrace step();  // advances one iteration

  const PolicyParams& params() const { return params_; }
  const PolicyVector& pi() const { return pi_; }
  const std::vector<double>& v() const { return v_; }
  double v_rho() const;
  double v_mu() const;
  double min_pi_opt() const;
  double v_star_rho() const { return v_star_rho_; }
  double v_star_mu() const { return v_star_mu_; }
  std::uint64_t iterations_done() const { return t_; }
  // Count of states where V decreased by more than 1e-10 in one step.
  std::uint64_t monotonicity_violations() const { return monotonicity_violations_; }

 private:
  void refresh_values();

  const TabularMdp& mdp_;
  PolicyParams params_;
  PolicyVector pi_;
  std::vector<double> v_, d_, prev_v_;
  std::vector<std::size_t> opt_actions_;
  double v_star_rho_ = 0.0, v_star_mu_ = 0.0;
  double eta_;
  CounterRng rng_;
  std::uint64_t t_ = 0;
  std::uint64_t monotonicity_violations_ = 0;
};

}  // namespace npglab
