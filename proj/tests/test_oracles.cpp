#include <doctest.h>

#include <cmath>
#include <vector>

#include "npglab/errors.hpp"
#include "npglab/oracles.hpp"
#include "npglab/rng.hpp"

using namespace npglab;

TEST_SUITE_BEGIN("oracles");

TEST_CASE("expected one-step progress: worked two-action case") {
  std::vector<double> pi = {0.5, 0.5}, r = {1.0, 0.0};
  auto rep = exact_progress_simplified(pi, r, 1.0);
  // frozen from enumerating a_t in {0, 1} and applying the sparse rule
  CHECK(rep.exact_progress == doctest::Approx(0.2310585786300049).epsilon(1e-12));
  CHECK(rep.nl_bound == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(rep.slack > 0.0);
  CHECK(brute_force_progress_simplified(pi, r, 1.0) ==
        doctest::Approx(rep.exact_progress).epsilon(1e-13));
}

TEST_CASE("expected progress vanishes at a near-deterministic optimal policy") {
  std::vector<double> pi = {1.0 - 1e-9, 1e-9}, r = {1.0, 0.0};
  auto rep = exact_progress_simplified(pi, r, 1.0);
  CHECK(rep.exact_progress >= 0.0);
  CHECK(rep.exact_progress <= 1e-8);
}

TEST_CASE("closed form tracks brute force across eta magnitudes") {
  CounterRng rng(41, 0);
  std::vector<double> r = {0.9, 0.4, 0.1};
  for (double eta : {0.01, 0.5, 1.0, 2.0, 10.0, 100.0}) {
    PolicyParams params(1, 3);
    for (auto& v : params.logits)
      v = 4.0 * (2.0 * rng.uniform(RngStream::kGeneric) - 1.0);
    auto pi = softmax(params, 0);
    auto rep = exact_progress_simplified(pi, r, eta);
    CHECK(std::abs(rep.exact_progress - brute_force_progress_simplified(pi, r, eta)) <=
          1e-12);
    CHECK(rep.slack >= -1e-10);
  }
}

TEST_CASE("stochastic progress on the benchmark instance, uniform policy") {
  const auto& inst = benchmark_bandit_instance();
  std::vector<double> pi(20, 0.05);
  auto step = StepSizeRule::adaptive(inst.r_max());
  auto rep = exact_progress_stochastic(pi, inst, step);
  CHECK(rep.slack >= 0.0);
  CHECK(rep.secondary_slack.value() >= 0.0);
  CHECK(rep.exact_progress > 0.0);
  CHECK(std::abs(brute_force_progress_stochastic(pi, inst, step) -
                 rep.exact_progress) <= 1e-12);
}

TEST_CASE("point-mass rewards meet the sum-form bound") {
  std::vector<RewardDistribution> dists(3);
  dists[0].support = {{0.9, 1.0}};
  dists[1].support = {{0.5, 1.0}};
  dists[2].support = {{0.2, 1.0}};
  BanditInstance inst({0.9, 0.5, 0.2}, dists, 1.0);
  std::vector<double> pi = {0.2, 0.5, 0.3};
  auto rep = exact_progress_stochastic(pi, inst, StepSizeRule::adaptive(1.0));
  CHECK(rep.exact_progress >= rep.nl_bound - 1e-12);
}

TEST_CASE("indifferent actions make progress and bounds vanish") {
  std::vector<RewardDistribution> dists(2);
  dists[0].support = {{0.5, 1.0}};
  dists[1].support = {{0.5, 1.0}};
  BanditInstance inst({0.5, 0.5}, dists, 1.0, TiePolicy::kAllow);
  std::vector<double> pi = {0.3, 0.7};
  auto rep = exact_progress_stochastic(pi, inst, StepSizeRule::adaptive(1.0));
  CHECK(rep.exact_progress == 0.0);
  CHECK(rep.nl_bound == 0.0);
  CHECK(rep.secondary_bound.value() == 0.0);
}

TEST_CASE("MDP progress on the tree meets the general bound") {
  auto tree = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
  auto params = adversarial_tree_init(tree, 0.07);
  auto rep = exact_progress_mdp(params, tree, 0.1);
  CHECK(rep.per_action_terms.size() == 85 * 4);
  CHECK(rep.slack >= 0.0);
  CHECK(rep.exact_progress > 0.0);
}

TEST_CASE("MDP progress vanishes at a near-optimal policy") {
  auto tree = tree_mdp(3, 3, {1.0, 0.6, 0.2}, 0.9, 0.2);
  PolicyParams params(tree.num_states(), 3, 0.0);
  for (std::size_t s = 0; s < tree.num_states(); ++s) params.at(s, 0) = 35.0;
  auto rep = exact_progress_mdp(params, tree, 0.1);
  CHECK(std::abs(rep.exact_progress) <= 1e-10);
  CHECK(rep.nl_bound <= 1e-10);
}

TEST_CASE("single-state MDP progress reduces to the bandit closed form") {
  std::vector<double> r = {0.9, 0.4, 0.1};
  std::vector<double> trans(1 * 3 * 1, 1.0);
  TabularMdp mdp(1, 3, trans, r, 0.0, {1.0}, {1.0});
  PolicyParams params(1, 3);
  params.logits = {0.3, -0.2, 0.6};
  auto pi = softmax(params, 0);
  auto mdp_rep = exact_progress_mdp(params, mdp, 0.7);
  auto bandit_rep = exact_progress_simplified(pi, r, 0.7);
  CHECK(std::abs(mdp_rep.exact_progress - bandit_rep.exact_progress) <= 1e-10);
}

TEST_CASE("piecewise-linear domination of the sigmoid-like progress") {
  CHECK(sigmoid_progress_term(0.5, 0.0, 1.0) == 0.0);
  // f at p = 1/2 collapses to tanh(y/2)
  CHECK(sigmoid_progress_term(0.5, 0.25, 1.0) ==
        doctest::Approx(0.12435300177159618).epsilon(1e-13));
  CHECK(sigmoid_progress_term(0.5, 0.25, 1.0) ==
        doctest::Approx(std::tanh(0.125)).epsilon(1e-13));
  CHECK(0.12435300177159618 >= (1.0 - 0.5) * 0.5 * 0.25);
  CHECK(0.12435300177159618 <= (1.0 + 0.5) * 0.5 * 0.25);

  CHECK(check_piecewise_domination(0.5, 0.5, 101) <= 1e-12);
  CHECK(check_piecewise_domination(1.0, 1.0, 101) <= 1e-12);
  CHECK(check_piecewise_domination(0.01, 0.1, 101) <= 1e-12);
  CHECK_THROWS_AS(check_piecewise_domination(0.0, 0.5, 11), InvalidArgument);
  CHECK_THROWS_AS(check_piecewise_domination(0.5, 1.5, 11), InvalidArgument);
  CHECK_THROWS_AS(check_piecewise_domination(0.5, 0.5, 1), InvalidArgument);
}

TEST_CASE("coefficient lower bound: worked case is tight") {
  std::vector<double> pi = {0.5, 0.5}, r = {1.0, 0.0};
  // LHS = 2 * 0.25 * 0.125 = RHS = 1 * 0.25 * 0.25: the bound is met with
  // equality at this point
  double slack = check_nl_coefficient_bound(pi, r);
  CHECK(slack == 0.0);

  std::vector<double> onehot = {1.0, 0.0};
  CHECK(check_nl_coefficient_bound(onehot, r) == 0.0);

  std::vector<double> tied = {1.0, 1.0};
  CHECK_THROWS_AS(check_nl_coefficient_bound(pi, tied), DegenerateInstance);
}

TEST_CASE("partial products classify the two canonical sequences") {
  std::vector<double> probs;
  for (int t = 2; t <= 100000; ++t)
    probs.push_back(1.0 - 1.0 / (static_cast<double>(t) * t));
  auto [prod, sum] = partial_product_analysis(probs);
  // complements summable: product telescopes to (T+1)/(2T) -> 1/2
  CHECK(prod == doctest::Approx(0.500005).epsilon(1e-9));
  CHECK(sum == doctest::Approx(0.64492406689).epsilon(1e-9));
  CHECK(prod > 0.4);

  probs.clear();
  for (int t = 1; t <= 100000; ++t)
    probs.push_back(1.0 - 1.0 / (static_cast<double>(t) + 1.0));
  auto [prod2, sum2] = partial_product_analysis(probs);
  CHECK(prod2 == doctest::Approx(1.0 / 100001.0).epsilon(1e-10));
  CHECK(sum2 > 10.0);

  std::vector<double> halves(20, 0.5);
  auto [prod3, sum3] = partial_product_analysis(halves);
  CHECK(prod3 == std::pow(2.0, -20.0));
  CHECK(sum3 == 10.0);

  std::vector<double> bad = {0.5, 1.0};
  CHECK_THROWS_AS(partial_product_analysis(bad), InvalidArgument);
}

TEST_SUITE_END();
