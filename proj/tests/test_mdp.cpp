#include <doctest.h>

#include <cmath>
#include <cstdint>
#include <vector>

#include "npglab/bandit.hpp"
#include "npglab/errors.hpp"
#include "npglab/mdp.hpp"
#include "npglab/policy.hpp"
#include "npglab/rng.hpp"
#include "npglab/updates.hpp"

using namespace npglab;

namespace {

TabularMdp random_mdp(CounterRng& rng, std::size_t S, std::size_t A, double gamma) {
  auto u = [&] { return rng.uniform(RngStream::kGeneric); };
  std::vector<double> trans(S * A * S), r(S * A), mu(S), rho(S);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      double sum = 0.0;
      for (std::size_t s2 = 0; s2 < S; ++s2) {
        trans[(s * A + a) * S + s2] = 0.05 + u();
        sum += trans[(s * A + a) * S + s2];
      }
      for (std::size_t s2 = 0; s2 < S; ++s2) trans[(s * A + a) * S + s2] /= sum;
      r[s * A + a] = u();
    }
  double mu_sum = 0.0, rho_sum = 0.0;
  for (std::size_t s = 0; s < S; ++s) {
    mu[s] = 0.05 + u();
    rho[s] = 0.05 + u();
    mu_sum += mu[s];
    rho_sum += rho[s];
  }
  for (std::size_t s = 0; s < S; ++s) {
    mu[s] /= mu_sum;
    rho[s] /= rho_sum;
  }
  return TabularMdp(S, A, std::move(trans), std::move(r), gamma, std::move(mu),
                    std::move(rho));
}

PolicyVector random_policy(CounterRng& rng, std::size_t S, std::size_t A) {
  PolicyParams params(S, A);
  for (auto& v : params.logits)
    v = 3.0 * (2.0 * rng.uniform(RngStream::kGeneric) - 1.0);
  return softmax_all(params);
}

}  // namespace

TEST_SUITE_BEGIN("mdp");

TEST_CASE("single self-loop state: V is the geometric series") {
  std::vector<double> trans = {1.0, 1.0};  // two actions, both stay
  std::vector<double> r = {0.5, 0.5};
  TabularMdp mdp(1, 2, trans, r, 0.9, {1.0}, {1.0});
  PolicyVector pi(1, 2);
  pi.probs = {0.3, 0.7};
  auto bundle = evaluate_policy(mdp, pi);
  CHECK(bundle.v[0] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(bundle.d_mu[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(bundle.q[0] == doctest::Approx(0.5 + 0.9 * 5.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy matches a value-iteration oracle") {
  CounterRng rng(21, 0);
  for (int trial = 0; trial < 10; ++trial) {
    auto mdp = random_mdp(rng, 5, 3, 0.9);
    auto pi = random_policy(rng, 5, 3);
    auto bundle = evaluate_policy(mdp, pi);

    // fixed-point iteration of V <- r_pi + gamma P_pi V
    std::vector<double> v(5, 0.0), next(5, 0.0);
    for (int it = 0; it < 700; ++it) {
      for (std::size_t s = 0; s < 5; ++s) {
        double acc = 0.0;
        for (std::size_t a = 0; a < 3; ++a) {
          double q = mdp.reward(s, a);
          for (const auto& e : mdp.edges(s, a)) q += 0.9 * e.prob * v[e.next];
          acc += pi.at(s, a) * q;
        }
        next[s] = acc;
      }
      v.swap(next);
    }
    for (std::size_t s = 0; s < 5; ++s)
      CHECK(std::abs(bundle.v[s] - v[s]) <= 1e-8);

    // bundle consistency
    double d_sum = 0.0;
    for (std::size_t s = 0; s < 5; ++s) {
      double v_from_q = 0.0, adv_mean = 0.0;
      for (std::size_t a = 0; a < 3; ++a) {
        v_from_q += pi.at(s, a) * bundle.q[s * 3 + a];
        adv_mean += pi.at(s, a) * bundle.adv[s * 3 + a];
      }
      CHECK(std::abs(v_from_q - bundle.v[s]) <= 1e-10);
      CHECK(std::abs(adv_mean) <= 1e-10);
      CHECK(bundle.d_mu[s] >= (1.0 - 0.9) * mdp.mu()[s] - 1e-12);
      d_sum += bundle.d_mu[s];
    }
    CHECK(std::abs(d_sum - 1.0) <= 1e-10);
  }
}

TEST_CASE("Q values stay inside [0, 1/(1-gamma)]") {
  CounterRng rng(22, 0);
  for (int trial = 0; trial < 10; ++trial) {
    double gamma = 0.5 + 0.45 * rng.uniform(RngStream::kGeneric);
    auto mdp = random_mdp(rng, 4, 3, gamma);
    auto bundle = evaluate_policy(mdp, random_policy(rng, 4, 3));
    for (double q : bundle.q) {
      CHECK(q >= -1e-12);
      CHECK(q <= 1.0 / (1.0 - gamma) + 1e-9);
    }
  }
}

TEST_CASE("DAG sweep and dense LU agree on the tree") {
  auto tree = tree_mdp(3, 3, {1.0, 0.6, 0.2}, 0.9, 0.2);
  REQUIRE(tree.has_dag_structure());
  CounterRng rng(23, 0);
  auto pi = random_policy(rng, tree.num_states(), 3);
  auto bundle = evaluate_policy(tree, pi);  // sweep path

  // residuals of the defining linear systems, straight from the tables
  const std::size_t S = tree.num_states();
  for (std::size_t s = 0; s < S; ++s) {
    double r_pi = 0.0, pv = 0.0, inflow = 0.0;
    for (std::size_t a = 0; a < 3; ++a) {
      r_pi += pi.at(s, a) * tree.reward(s, a);
      for (std::size_t s2 = 0; s2 < S; ++s2)
        pv += pi.at(s, a) * tree.trans(s, a, s2) * bundle.v[s2];
    }
    CHECK(std::abs(bundle.v[s] - (r_pi + 0.9 * pv)) <= 1e-10);
    for (std::size_t s2 = 0; s2 < S; ++s2)
      for (std::size_t a = 0; a < 3; ++a)
        inflow += bundle.d_mu[s2] * pi.at(s2, a) * tree.trans(s2, a, s);
    CHECK(std::abs(bundle.d_mu[s] - ((1.0 - 0.9) * tree.mu()[s] + 0.9 * inflow)) <=
          1e-10);
  }
}

TEST_CASE("visitation matches geometric-horizon Monte Carlo rollouts") {
  CounterRng rng(24, 0);
  auto mdp = random_mdp(rng, 5, 3, 0.9);
  auto pi = random_policy(rng, 5, 3);
  auto bundle = evaluate_policy(mdp, pi);

  const int episodes = 1000000;
  std::vector<std::int64_t> counts(5, 0);
  std::vector<double> row(5);
  for (int e = 0; e < episodes; ++e) {
    // start s0 ~ mu, stop with probability 1-gamma at each stage
    std::size_t s = sample_categorical(mdp.mu(), rng.uniform(RngStream::kGeneric));
    while (rng.uniform(RngStream::kGeneric) < 0.9) {
      std::size_t a = sample_categorical(pi.row(s), rng.uniform(RngStream::kGeneric));
      for (std::size_t s2 = 0; s2 < 5; ++s2) row[s2] = mdp.trans(s, a, s2);
      s = sample_categorical(row, rng.uniform(RngStream::kGeneric));
    }
    ++counts[s];
  }
  for (std::size_t s = 0; s < 5; ++s) {
    double freq = static_cast<double>(counts[s]) / episodes;
    double se = std::sqrt(bundle.d_mu[s] * (1.0 - bundle.d_mu[s]) / episodes);
    CHECK(std::abs(freq - bundle.d_mu[s]) <= 3.0 * se);
  }
}

TEST_CASE("optimal policy of the tree picks the highest-reward action everywhere") {
  auto tree = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  CHECK(tree.num_states() == 85);
  auto [pi_star, bundle] = optimal_policy(tree);
  auto opt = greedy_actions(pi_star);
  for (std::size_t s = 0; s < 85; ++s) CHECK(opt[s] == 0);
  for (std::size_t s = 0; s < 85; ++s)
    CHECK(bundle.v[s] == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("optimal policy dominates random policies") {
  CounterRng rng(25, 0);
  for (int trial = 0; trial < 4; ++trial) {
    auto mdp = random_mdp(rng, 5, 3, 0.85);
    auto [pi_star, star] = optimal_policy(mdp);
    for (int p = 0; p < 5; ++p) {
      auto bundle = evaluate_policy(mdp, random_policy(rng, 5, 3));
      for (std::size_t s = 0; s < 5; ++s) CHECK(star.v[s] >= bundle.v[s] - 1e-10);
    }
  }
}

TEST_CASE("gamma = 0 single-state model reduces to the bandit argmax") {
  std::vector<double> trans = {1.0, 1.0, 1.0};
  std::vector<double> r = {0.2, 0.9, 0.5};
  TabularMdp mdp(1, 3, trans, r, 0.0, {1.0}, {1.0});
  auto [pi_star, bundle] = optimal_policy(mdp);
  CHECK(greedy_actions(pi_star)[0] == 1);
  CHECK(bundle.v[0] == doctest::Approx(0.9).epsilon(1e-12));
}

TEST_CASE("tree construction") {
  auto tree = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  CHECK(tree.num_states() == 85);
  CHECK(tree.mu()[0] == doctest::Approx(0.2).epsilon(1e-14));
  for (std::size_t s = 1; s < 85; ++s)
    CHECK(tree.mu()[s] == doctest::Approx(0.8 / 84.0).epsilon(1e-12));
  CHECK(tree.rho()[0] == 1.0);
  // interior transitions: action j moves to child j, leaves self-loop
  CHECK(tree.trans(0, 2, 3) == 1.0);
  CHECK(tree.trans(84, 1, 84) == 1.0);
  const std::vector<double> rewards = {1.0, 0.9, 0.8, 0.2};
  for (std::size_t a = 0; a < 4; ++a) CHECK(tree.reward(10, a) == rewards[a]);

  auto leaf = tree_mdp(1, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  CHECK(leaf.num_states() == 1);
  auto [pi_star, bundle] = optimal_policy(leaf);
  CHECK(bundle.value_at(leaf.rho()) == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("adversarial initialization hits the published probabilities") {
  auto tree = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  auto params = adversarial_tree_init(tree, 0.07);
  auto pi = softmax_all(params);
  for (std::size_t s = 0; s < 85; ++s) {
    CHECK(std::abs(pi.at(s, 0) - 0.07) <= 1e-10);
    for (std::size_t a = 1; a < 4; ++a) CHECK(std::abs(pi.at(s, a) - 0.31) <= 1e-10);
  }
  // boundary: opt_prob = 1/A gives the uniform policy
  auto uniform = softmax_all(adversarial_tree_init(tree, 0.25));
  for (std::size_t s = 0; s < 85; ++s)
    for (std::size_t a = 0; a < 4; ++a)
      CHECK(std::abs(uniform.at(s, a) - 0.25) <= 1e-12);
  CHECK_THROWS_AS(adversarial_tree_init(tree, 0.3), InvalidArgument);
  CHECK_THROWS_AS(adversarial_tree_init(tree, 0.0), InvalidArgument);
}

TEST_CASE("a near-optimal policy is a fixed point of Algorithm 1") {
  auto tree = tree_mdp(3, 3, {1.0, 0.6, 0.2}, 0.9, 0.2);
  PolicyParams params(tree.num_states(), 3, 0.0);
  for (std::size_t s = 0; s < tree.num_states(); ++s) params.at(s, 0) = 40.0;
  auto pi_before = softmax_all(params);
  CounterRng rng(26, 0);
  auto [next, trace] = step_algorithm1(params, tree, 0.1, rng, 1);
  auto pi_after = softmax_all(next);
  for (std::size_t i = 0; i < pi_before.probs.size(); ++i)
    CHECK(std::abs(pi_before.probs[i] - pi_after.probs[i]) <= 1e-9);
}

TEST_CASE("single-state gamma=0 Algorithm 1 equals the baseline bandit update") {
  const auto& inst = benchmark_bandit_instance();
  std::vector<double> trans(1 * 20 * 1, 1.0);
  std::vector<double> r(inst.means().begin(), inst.means().end());
  TabularMdp mdp(1, 20, trans, r, 0.0, {1.0}, {1.0});

  PolicyParams mdp_params(1, 20, 0.0);
  PolicyParams bandit_params(1, 20, 0.0);
  UpdateConfig cfg;
  cfg.estimator = EstimatorKind::kSimplifiedIS;
  cfg.baseline = true;
  cfg.step = StepSizeRule::constant(0.25);

  CounterRng rng_mdp(31, 4), rng_bandit(31, 4);
  for (int t = 1; t <= 1000; ++t) {
    auto [next, trace] = step_algorithm1(mdp_params, mdp, 0.25, rng_mdp, t);
    mdp_params = next;
    auto [bnext, btrace] = step_bandit(bandit_params, inst, cfg, rng_bandit, t);
    bandit_params = bnext;
  }
  for (std::size_t a = 0; a < 20; ++a)
    CHECK(mdp_params.at(0, a) == bandit_params.at(0, a));
}

TEST_CASE("value improves monotonically at every state along Algorithm 1") {
  auto tree = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  Algorithm1Run run(tree, adversarial_tree_init(tree, 0.07), 0.1, 5, 0);
  for (int t = 0; t < 10000; ++t) run.step();
  CHECK(run.monotonicity_violations() == 0);
  CHECK(run.min_pi_opt() > 0.0);
  CHECK(run.v_star_rho() == doctest::Approx(10.0).epsilon(1e-9));
}

TEST_CASE("runner matches the standalone step function") {
  auto tree = tree_mdp(3, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  auto init = adversarial_tree_init(tree, 0.07);
  Algorithm1Run run(tree, init, 0.5, 77, 3);
  PolicyParams params = init;
  CounterRng rng(77, 3);
  for (int t = 1; t <= 200; ++t) {
    run.step();
    auto [next, trace] = step_algorithm1(params, tree, 0.5, rng, t);
    params = next;
  }
  for (std::size_t i = 0; i < params.logits.size(); ++i)
    CHECK(params.logits[i] == doctest::Approx(run.params().logits[i]).epsilon(1e-12));
}

TEST_CASE("model validation rejects corrupt inputs") {
  std::vector<double> trans = {0.5, 0.4};  // does not sum to 1
  CHECK_THROWS_AS(TabularMdp(1, 2, trans, {0.5, 0.5}, 0.9, {1.0}, {1.0}),
                  InvalidArgument);
  std::vector<double> ok = {1.0, 1.0};
  CHECK_THROWS_AS(TabularMdp(1, 2, ok, {0.5, 1.5}, 0.9, {1.0}, {1.0}),
                  InvalidArgument);  // reward out of range
  CHECK_THROWS_AS(TabularMdp(1, 2, ok, {0.5, 0.5}, 1.0, {1.0}, {1.0}),
                  InvalidArgument);  // gamma = 1
  CHECK_THROWS_AS(TabularMdp(1, 2, ok, {0.5, 0.5}, 0.9, {0.0}, {1.0}),
                  InvalidArgument);  // mu must be strictly positive
}

TEST_CASE("JSON round trip preserves the model") {
  auto tree = tree_mdp(3, 3, {1.0, 0.6, 0.2}, 0.9, 0.2);
  auto copy = TabularMdp::from_json(tree.to_json());
  CHECK(copy.num_states() == tree.num_states());
  CHECK(copy.num_actions() == tree.num_actions());
  CHECK(copy.gamma() == tree.gamma());
  for (std::size_t s = 0; s < tree.num_states(); ++s) {
    CHECK(copy.mu()[s] == tree.mu()[s]);
    CHECK(copy.rho()[s] == tree.rho()[s]);
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(copy.reward(s, a) == tree.reward(s, a));
      for (std::size_t s2 = 0; s2 < tree.num_states(); ++s2)
        CHECK(copy.trans(s, a, s2) == tree.trans(s, a, s2));
    }
  }
  CHECK(copy.has_dag_structure());
}

TEST_SUITE_END();
