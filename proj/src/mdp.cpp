#include "npglab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "npglab/errors.hpp"

namespace npglab {
namespace {

constexpr double kDistTol = 1e-12;
constexpr double kResidualTol = 1e-10;

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Per-state mean reward and mean self-transition probability under pi.
void mix_policy_row(const TabularMdp& mdp, const PolicyVector& pi, std::size_t s,
                    double& r_pi, double& self_p) {
  r_pi = 0.0;
  self_p = 0.0;
  for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
    double p = pi.at(s, a);
    r_pi += p * mdp.reward(s, a);
    for (const auto& e : mdp.edges(s, a))
      if (e.next == s) self_p += p * e.prob;
  }
}

// Exact one-sweep evaluation on DAG-structured models (self-loops allowed).
void eval_dag(const TabularMdp& mdp, const PolicyVector& pi, std::vector<double>& v,
              std::vector<double>& d) {
  const auto& topo = mdp.topo_order();
  const std::size_t S = mdp.num_states();
  const double gamma = mdp.gamma();
  v.assign(S, 0.0);
  d.assign(S, 0.0);

  // Values: children precede parents when walking topo order backwards.
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    std::size_t s = *it;
    double r_pi, self_p;
    mix_policy_row(mdp, pi, s, r_pi, self_p);
    double acc = r_pi;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      double p = pi.at(s, a);
      for (const auto& e : mdp.edges(s, a))
        if (e.next != s) acc += gamma * p * e.prob * v[e.next];
    }
    v[s] = acc / (1.0 - gamma * self_p);
  }

  // Visitation: parents precede children in topo order.
  for (std::size_t s_idx : topo) {
    double inflow = 0.0;
    for (const auto& in : mdp.in_edges(s_idx))
      inflow += d[in.from] * pi.at(in.from, in.action) * in.prob;
    double r_pi, self_p;
    mix_policy_row(mdp, pi, s_idx, r_pi, self_p);
    d[s_idx] = ((1.0 - gamma) * mdp.mu()[s_idx] + gamma * inflow) /
               (1.0 - gamma * self_p);
  }
}

void eval_dense(const TabularMdp& mdp, const PolicyVector& pi, std::vector<double>& v,
                std::vector<double>& d) {
  const std::size_t S = mdp.num_states();
  const double gamma = mdp.gamma();
  Eigen::MatrixXd a_mat = Eigen::MatrixXd::Identity(S, S);
  Eigen::VectorXd r_pi(S), mu(S);
  for (std::size_t s = 0; s < S; ++s) {
    double rsum = 0.0;
    for (std::size_t a = 0; a < mdp.num_actions(); ++a) {
      double p = pi.at(s, a);
      rsum += p * mdp.reward(s, a);
      for (const auto& e : mdp.edges(s, a)) a_mat(s, e.next) -= gamma * p * e.prob;
    }
    r_pi(s) = rsum;
    mu(s) = mdp.mu()[s];
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(a_mat);
  Eigen::VectorXd v_vec = lu.solve(r_pi);
  Eigen::VectorXd d_vec = lu.transpose().solve(Eigen::VectorXd((1.0 - gamma) * mu));

  double v_resid = (a_mat * v_vec - r_pi).cwiseAbs().maxCoeff();
  double d_resid =
      (a_mat.transpose() * d_vec - (1.0 - gamma) * mu).cwiseAbs().maxCoeff();
  if (!std::isfinite(v_resid) || v_resid > kResidualTol || !std::isfinite(d_resid) ||
      d_resid > kResidualTol)
    throw SolveFailure("evaluate_policy: linear solve residual " +
                       std::to_string(std::max(v_resid, d_resid)) +
                       " exceeds tolerance (corrupted model?)");

  v.assign(v_vec.data(), v_vec.data() + S);
  d.assign(d_vec.data(), d_vec.data() + S);
}

void eval_v_d(const TabularMdp& mdp, const PolicyVector& pi, std::vector<double>& v,
              std::vector<double>& d) {
  if (mdp.has_dag_structure())
    eval_dag(mdp, pi, v, d);
  else
    eval_dense(mdp, pi, v, d);
}

double q_value(const TabularMdp& mdp, const std::vector<double>& v, std::size_t s,
               std::size_t a) {
  double next = 0.0;
  for (const auto& e : mdp.edges(s, a)) next += e.prob * v[e.next];
  return mdp.reward(s, a) + mdp.gamma() * next;
}

}  // namespace

TabularMdp::TabularMdp(std::size_t S, std::size_t A, std::vector<double> trans,
                       std::vector<double> r, double gamma, std::vector<double> mu,
                       std::vector<double> rho)
    : S_(S),
      A_(A),
      trans_(std::move(trans)),
      r_(std::move(r)),
      gamma_(gamma),
      mu_(std::move(mu)),
      rho_(std::move(rho)) {
  if (S_ == 0 || A_ == 0) throw InvalidArgument("TabularMdp: empty state/action space");
  if (trans_.size() != S_ * A_ * S_ || r_.size() != S_ * A_)
    throw InvalidArgument("TabularMdp: table size mismatch");
  if (!(gamma_ >= 0.0 && gamma_ < 1.0))
    throw InvalidArgument("TabularMdp: gamma must be in [0,1)");
  if (mu_.size() != S_ || rho_.size() != S_)
    throw InvalidArgument("TabularMdp: distribution size mismatch");

  for (double x : r_)
    if (!(x >= 0.0 && x <= 1.0))
      throw InvalidArgument("TabularMdp: rewards must lie in [0,1]");

  double mu_sum = 0.0, rho_sum = 0.0;
  min_mu_ = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < S_; ++s) {
    if (!(mu_[s] > 0.0))
      throw InvalidArgument("TabularMdp: mu must satisfy min_s mu(s) > 0");
    if (rho_[s] < 0.0) throw InvalidArgument("TabularMdp: rho entries must be >= 0");
    min_mu_ = std::min(min_mu_, mu_[s]);
    mu_sum += mu_[s];
    rho_sum += rho_[s];
  }
  if (std::abs(mu_sum - 1.0) > kDistTol || std::abs(rho_sum - 1.0) > kDistTol)
    throw InvalidArgument("TabularMdp: mu/rho must sum to 1");

  edges_.resize(S_ * A_);
  in_edges_.resize(S_);
  for (std::size_t s = 0; s < S_; ++s) {
    for (std::size_t a = 0; a < A_; ++a) {
      double row_sum = 0.0;
      for (std::size_t s2 = 0; s2 < S_; ++s2) {
        double p = this->trans(s, a, s2);
        if (p < 0.0) throw InvalidArgument("TabularMdp: negative transition prob");
        row_sum += p;
        if (p > 0.0) {
          edges_[s * A_ + a].push_back({static_cast<std::uint32_t>(s2), p});
          if (s2 != s)
            in_edges_[s2].push_back({static_cast<std::uint32_t>(s),
                                     static_cast<std::uint32_t>(a), p});
        }
      }
      if (std::abs(row_sum - 1.0) > kDistTol)
        throw InvalidArgument("TabularMdp: transition row does not sum to 1");
    }
  }

  // Kahn's algorithm on cross-state edges; empty order marks cyclic models.
  std::vector<std::size_t> in_count(S_, 0);
  std::vector<std::vector<std::uint32_t>> preds(S_);
  for (std::size_t s = 0; s < S_; ++s) {
    std::vector<bool> seen(S_, false);
    for (std::size_t a = 0; a < A_; ++a)
      for (const auto& e : edges_[s * A_ + a])
        if (e.next != s && !seen[e.next]) {
          seen[e.next] = true;
          ++in_count[e.next];
          preds[e.next].push_back(static_cast<std::uint32_t>(s));
        }
  }
  std::deque<std::uint32_t> ready;
  for (std::size_t s = 0; s < S_; ++s)
    if (in_count[s] == 0) ready.push_back(static_cast<std::uint32_t>(s));
  std::vector<std::uint32_t> topo;
  std::vector<std::size_t> remaining = in_count;
  // Process sources first; each pop decrements its successors.
  std::vector<std::vector<std::uint32_t>> succ(S_);
  for (std::size_t s2 = 0; s2 < S_; ++s2)
    for (auto p : preds[s2]) succ[p].push_back(static_cast<std::uint32_t>(s2));
  while (!ready.empty()) {
    std::uint32_t s = ready.front();
    ready.pop_front();
    topo.push_back(s);
    for (auto nxt : succ[s])
      if (--remaining[nxt] == 0) ready.push_back(nxt);
  }
  if (topo.size() == S_) topo_ = std::move(topo);
}

double ValueBundle::value_at(const std::vector<double>& dist) const {
  return dot(v, dist);
}

ValueBundle evaluate_policy(const TabularMdp& mdp, const PolicyVector& pi) {
  if (pi.states != mdp.num_states() || pi.actions != mdp.num_actions())
    throw InvalidArgument("evaluate_policy: policy dimension mismatch");
  ValueBundle out;
  eval_v_d(mdp, pi, out.v, out.d_mu);
  const std::size_t S = mdp.num_states(), A = mdp.num_actions();
  out.q.resize(S * A);
  out.adv.resize(S * A);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      out.q[s * A + a] = q_value(mdp, out.v, s, a);
      out.adv[s * A + a] = out.q[s * A + a] - out.v[s];
    }
  return out;
}

std::pair<PolicyVector, ValueBundle> optimal_policy(const TabularMdp& mdp) {
  const std::size_t S = mdp.num_states(), A = mdp.num_actions();
  std::vector<double> v(S, 0.0), v_next(S, 0.0);
  constexpr std::uint64_t kMaxSweeps = 100'000'000;
  for (std::uint64_t sweep = 0;; ++sweep) {
    for (std::size_t s = 0; s < S; ++s) {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < A; ++a) best = std::max(best, q_value(mdp, v, s, a));
      v_next[s] = best;
    }
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t s = 0; s < S; ++s) {
      double diff = v_next[s] - v[s];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
    }
    v.swap(v_next);
    if (hi - lo <= 1e-12) break;
    if (sweep + 1 >= kMaxSweeps)
      throw SolveFailure("optimal_policy: value iteration failed to converge");
  }

  PolicyVector greedy(S, A);
  for (std::size_t s = 0; s < S; ++s) {
    std::size_t best_a = 0;
    double best_q = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < A; ++a) {
      double q = q_value(mdp, v, s, a);
      if (q > best_q) {
        best_q = q;
        best_a = a;
      }
    }
    greedy.at(s, best_a) = 1.0;
  }
  return {greedy, evaluate_policy(mdp, greedy)};
}

std::vector<std::size_t> greedy_actions(const PolicyVector& pi_star) {
  std::vector<std::size_t> actions(pi_star.states);
  for (std::size_t s = 0; s < pi_star.states; ++s) {
    auto row = pi_star.row(s);
    actions[s] = static_cast<std::size_t>(
        std::max_element(row.begin(), row.end()) - row.begin());
  }
  return actions;
}

TabularMdp tree_mdp(std::size_t depth, std::size_t branch,
                    const std::vector<double>& rewards, double gamma,
                    double mu_root_mass) {
  if (depth < 1) throw InvalidArgument("tree_mdp: depth must be >= 1");
  if (branch < 2) throw InvalidArgument("tree_mdp: branch must be >= 2");
  if (rewards.size() != branch)
    throw InvalidArgument("tree_mdp: need one reward per action");
  std::size_t S = 0, level = 1;
  for (std::size_t i = 0; i < depth; ++i, level *= branch) S += level;
  const std::size_t A = branch;
  const std::size_t internal = S - (level / branch);  // states with children

  std::vector<double> trans(S * A * S, 0.0);
  std::vector<double> r(S * A);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      r[s * A + a] = rewards[a];
      std::size_t next = s < internal ? s * branch + 1 + a : s;  // leaves self-loop
      trans[(s * A + a) * S + next] = 1.0;
    }

  std::vector<double> mu(S), rho(S, 0.0);
  rho[0] = 1.0;
  if (S == 1) {
    mu[0] = 1.0;
  } else {
    if (!(mu_root_mass > 0.0 && mu_root_mass < 1.0))
      throw InvalidArgument("tree_mdp: mu_root_mass must be in (0,1)");
    mu[0] = mu_root_mass;
    double rest = (1.0 - mu_root_mass) / static_cast<double>(S - 1);
    for (std::size_t s = 1; s < S; ++s) mu[s] = rest;
    // Renormalize the round-off so mu passes the 1e-12 sum check.
    double sum = mu[0] + rest * static_cast<double>(S - 1);
    for (double& m : mu) m /= sum;
  }
  return TabularMdp(S, A, std::move(trans), std::move(r), gamma, std::move(mu),
                    std::move(rho));
}

PolicyParams adversarial_tree_init(const TabularMdp& mdp, double opt_prob) {
  const std::size_t A = mdp.num_actions();
  if (!(opt_prob > 0.0 && opt_prob <= 1.0 / static_cast<double>(A)))
    throw InvalidArgument("adversarial_tree_init: opt_prob must be in (0, 1/A]");
  auto [pi_star, bundle] = optimal_policy(mdp);
  auto opt = greedy_actions(pi_star);
  PolicyParams params(mdp.num_states(), A);
  double other = (1.0 - opt_prob) / static_cast<double>(A - 1);
  for (std::size_t s = 0; s < mdp.num_states(); ++s)
    for (std::size_t a = 0; a < A; ++a)
      params.at(s, a) = std::log(a == opt[s] ? opt_prob : other);
  return params;
}

std::pair<PolicyParams, MdpStepTrace> step_algorithm1(
    const PolicyParams& params, const TabularMdp& mdp, double eta, CounterRng& rng,
    std::uint64_t t, const std::vector<std::size_t>* opt_actions) {
  if (params.states != mdp.num_states() || params.actions != mdp.num_actions())
    throw InvalidArgument("step_algorithm1: params dimension mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("step_algorithm1: eta must be positive");
  if (!params.finite()) throw NumericalFailure("step_algorithm1: non-finite logits");

  PolicyParams out = params;
  PolicyVector pi = softmax_all(out);
  ValueBundle bundle = evaluate_policy(mdp, pi);

  MdpStepTrace trace;
  trace.state = sample_categorical(bundle.d_mu, rng.uniform(RngStream::kState));
  trace.action = sample_categorical(pi.row(trace.state), rng.uniform(RngStream::kAction));
  trace.v_mu = bundle.value_at(mdp.mu());
  trace.v_rho = bundle.value_at(mdp.rho());
  trace.eta = eta;
  if (opt_actions) {
    double min_opt = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < mdp.num_states(); ++s)
      min_opt = std::min(min_opt, pi.at(s, (*opt_actions)[s]));
    trace.min_pi_opt = min_opt;
  } else {
    trace.min_pi_opt = std::numeric_limits<double>::quiet_NaN();
  }

  const std::size_t A = mdp.num_actions();
  double advantage = bundle.q[trace.state * A + trace.action] - bundle.v[trace.state];
  out.at(trace.state, trace.action) +=
      eta * (advantage / pi.at(trace.state, trace.action));
  recenter_row_inplace(out.row(trace.state));
  for (double v : out.row(trace.state))
    if (!std::isfinite(v))
      throw NumericalFailure("step_algorithm1: non-finite logits at t=" +
                             std::to_string(t));
  return {std::move(out), trace};
}

Algorithm1Run::Algorithm1Run(const TabularMdp& mdp, PolicyParams init, double eta,
                             std::uint64_t seed, std::uint64_t run_id)
    : mdp_(mdp), params_(std::move(init)), eta_(eta), rng_(seed, run_id) {
  if (params_.states != mdp.num_states() || params_.actions != mdp.num_actions())
    throw InvalidArgument("Algorithm1Run: params dimension mismatch");
  if (!(eta > 0.0)) throw InvalidArgument("Algorithm1Run: eta must be positive");
  pi_ = softmax_all(params_);
  auto [pi_star, star_bundle] = optimal_policy(mdp_);
  opt_actions_ = greedy_actions(pi_star);
  v_star_rho_ = star_bundle.value_at(mdp_.rho());
  v_star_mu_ = star_bundle.value_at(mdp_.mu());
  refresh_values();
  prev_v_ = v_;
}

void Algorithm1Run::refresh_values() { eval_v_d(mdp_, pi_, v_, d_); }

double Algorithm1Run::v_rho() const { return dot(v_, mdp_.rho()); }
double Algorithm1Run::v_mu() const { return dot(v_, mdp_.mu()); }

double Algorithm1Run::min_pi_opt() const {
  double min_opt = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < mdp_.num_states(); ++s)
    min_opt = std::min(min_opt, pi_.at(s, opt_actions_[s]));
  return min_opt;
}

MdpStepTrace Algorithm1Run::step() {
  ++t_;
  MdpStepTrace trace;
  trace.state = sample_categorical(d_, rng_.uniform(RngStream::kState));
  trace.action =
      sample_categorical(pi_.row(trace.state), rng_.uniform(RngStream::kAction));
  trace.v_mu = v_mu();
  trace.v_rho = v_rho();
  trace.min_pi_opt = min_pi_opt();
  trace.eta = eta_;

  double q = q_value(mdp_, v_, trace.state, trace.action);
  double advantage = q - v_[trace.state];
  params_.at(trace.state, trace.action) +=
      eta_ * (advantage / pi_.at(trace.state, trace.action));
  recenter_row_inplace(params_.row(trace.state));
  for (double v : params_.row(trace.state))
    if (!std::isfinite(v))
      throw NumericalFailure("Algorithm1Run: non-finite logits at t=" +
                             std::to_string(t_) + " s_t=" + std::to_string(trace.state) +
                             " a_t=" + std::to_string(trace.action));
  softmax_row(params_.row(trace.state), pi_.row(trace.state));

  prev_v_.swap(v_);
  refresh_values();
  for (std::size_t s = 0; s < mdp_.num_states(); ++s)
    if (v_[s] < prev_v_[s] - 1e-10) ++monotonicity_violations_;
  return trace;
}

std::string TabularMdp::to_json() const {
  nlohmann::json j;
  j["S"] = S_;
  j["A"] = A_;
  j["gamma"] = gamma_;
  auto trans = nlohmann::json::array();
  for (std::size_t s = 0; s < S_; ++s) {
    auto per_action = nlohmann::json::array();
    for (std::size_t a = 0; a < A_; ++a) {
      auto row = nlohmann::json::array();
      for (std::size_t s2 = 0; s2 < S_; ++s2) row.push_back(this->trans(s, a, s2));
      per_action.push_back(row);
    }
    trans.push_back(per_action);
  }
  j["trans"] = trans;
  auto r = nlohmann::json::array();
  for (std::size_t s = 0; s < S_; ++s) {
    auto row = nlohmann::json::array();
    for (std::size_t a = 0; a < A_; ++a) row.push_back(reward(s, a));
    r.push_back(row);
  }
  j["r"] = r;
  j["mu"] = mu_;
  j["rho"] = rho_;
  return j.dump();
}

TabularMdp TabularMdp::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  std::size_t S = j.at("S").get<std::size_t>();
  std::size_t A = j.at("A").get<std::size_t>();
  std::vector<double> trans(S * A * S), r(S * A);
  for (std::size_t s = 0; s < S; ++s)
    for (std::size_t a = 0; a < A; ++a) {
      for (std::size_t s2 = 0; s2 < S; ++s2)
        trans[(s * A + a) * S + s2] = j.at("trans").at(s).at(a).at(s2).get<double>();
      r[s * A + a] = j.at("r").at(s).at(a).get<double>();
    }
  return TabularMdp(S, A, std::move(trans), std::move(r),
                    j.at("gamma").get<double>(),
                    j.at("mu").get<std::vector<double>>(),
                    j.at("rho").get<std::vector<double>>());
}

}  // namespace npglab
