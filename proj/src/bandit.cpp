#include "npglab/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <json.hpp>

#include "npglab/errors.hpp"

namespace npglab {

double RewardDistribution::mean() const {
  double m = 0.0;
  for (const Atom& atom : support) m += atom.prob * atom.value;
  return m;
}

BanditInstance::BanditInstance(std::vector<double> means,
                               std::vector<RewardDistribution> dists, double r_max,
                               TiePolicy ties)
    : means_(std::move(means)), dists_(std::move(dists)), r_max_(r_max) {
  const std::size_t k = means_.size();
  if (k < 2) throw InvalidArgument("BanditInstance: need at least two actions");
  if (dists_.size() != k)
    throw InvalidArgument("BanditInstance: means/dists size mismatch");
  if (!(r_max_ > 0.0)) throw InvalidArgument("BanditInstance: r_max must be positive");

  for (std::size_t a = 0; a < k; ++a) {
    if (!(means_[a] >= 0.0 && means_[a] <= 1.0))
      throw InvalidArgument("BanditInstance: mean reward outside [0,1]");
    const auto& d = dists_[a];
    if (d.support.empty())
      throw InvalidArgument("BanditInstance: empty reward support");
    double psum = 0.0;
    for (const auto& atom : d.support) {
      if (!(atom.prob > 0.0))
        throw InvalidArgument("BanditInstance: non-positive support probability");
      if (std::abs(atom.value) > r_max_)
        throw InvalidArgument("BanditInstance: support value outside [-r_max, r_max]");
      psum += atom.prob;
    }
    if (std::abs(psum - 1.0) > 1e-12)
      throw InvalidArgument("BanditInstance: support probabilities do not sum to 1");
    if (std::abs(d.mean() - means_[a]) > 1e-12)
      throw InvalidArgument("BanditInstance: distribution mean differs from r(a)");
  }

  optimal_action_ = static_cast<std::size_t>(
      std::max_element(means_.begin(), means_.end()) - means_.begin());
  double best_other = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < k; ++a)
    if (a != optimal_action_) best_other = std::max(best_other, means_[a]);
  reward_gap_ = means_[optimal_action_] - best_other;
  if (ties == TiePolicy::kReject && !(reward_gap_ > 0.0))
    throw DegenerateInstance("BanditInstance: tied optimal actions (gap = 0)");
}

double sample_reward(const BanditInstance& inst, std::size_t action, CounterRng& rng) {
  const auto& support = inst.dist(action).support;
  if (support.size() == 1) return support[0].value;
  double u = rng.uniform(RngStream::kReward);
  double acc = 0.0;
  for (const auto& atom : support) {
    acc += atom.prob;
    if (u < acc) return atom.value;
  }
  return support.back().value;
}

double expected_reward(const BanditInstance& inst, std::span<const double> pi) {
  if (pi.size() != inst.num_actions())
    throw InvalidArgument("expected_reward: dimension mismatch");
  double v = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) v += pi[a] * inst.mean(a);
  return v;
}

const BanditInstance& benchmark_bandit_instance() {
  static const BanditInstance inst = [] {
    const std::vector<double> r = {
        0.96990985, 0.95071431, 0.86617615, 0.83244264, 0.73199394,
        0.70807258, 0.60111501, 0.59865848, 0.52475643, 0.43194502,
        0.37454012, 0.30424224, 0.29122914, 0.21233911, 0.18340451,
        0.18182497, 0.15601864, 0.15599452, 0.05808361, 0.02058449};
    std::vector<RewardDistribution> dists(r.size());
    for (std::size_t a = 0; a < r.size(); ++a)
      dists[a].support = {{r[a] - 3.0, 0.5}, {r[a] + 3.0, 0.5}};
    return BanditInstance(r, std::move(dists), 4.0);
  }();
  return inst;
}

std::string BanditInstance::to_json() const {
  nlohmann::json j;
  j["K"] = num_actions();
  j["r"] = means_;
  auto dists = nlohmann::json::array();
  for (const auto& d : dists_) {
    auto atoms = nlohmann::json::array();
    for (const auto& atom : d.support)
      atoms.push_back(nlohmann::json::array({atom.value, atom.prob}));
    dists.push_back(atoms);
  }
  j["dists"] = dists;
  j["r_max"] = r_max_;
  return j.dump();
}

BanditInstance BanditInstance::from_json(const std::string& text, TiePolicy ties) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::vector<double> r = j.at("r").get<std::vector<double>>();
  if (j.contains("K") && j.at("K").get<std::size_t>() != r.size())
    throw InvalidArgument("BanditInstance: K does not match r length");
  std::vector<RewardDistribution> dists;
  for (const auto& d : j.at("dists")) {
    RewardDistribution rd;
    for (const auto& atom : d)
      rd.support.push_back({atom.at(0).get<double>(), atom.at(1).get<double>()});
    dists.push_back(std::move(rd));
  }
  return BanditInstance(std::move(r), std::move(dists), j.at("r_max").get<double>(),
                        ties);
}

}  // namespace npglab
