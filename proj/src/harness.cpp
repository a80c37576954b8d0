#include "npglab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "npglab/errors.hpp"
#include "npglab/policy.hpp"

namespace npglab {
namespace {

// Escape level for MDP runs: half the plateau level seen on the tree
// benchmark. Bandit runs use half the instance's reward gap.
constexpr double kMdpEscapeGap = 0.05;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

StepSizeRule step_rule_from_json(const nlohmann::json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "constant") return StepSizeRule::constant(j.at("eta").get<double>());
  if (kind == "adaptive") {
    std::optional<double> denom;
    if (j.contains("denominator") && !j.at("denominator").is_null())
      denom = j.at("denominator").get<double>();
    return StepSizeRule::adaptive(j.at("r_max").get<double>(),
                                  j.value("scale", 1.0), denom);
  }
  throw InvalidArgument("spec: unknown step kind '" + kind + "'");
}

PolicyParams resolve_init(const ExperimentSpec& spec) {
  std::size_t states = spec.is_bandit() ? 1 : spec.mdp->num_states();
  std::size_t actions =
      spec.is_bandit() ? spec.bandit->num_actions() : spec.mdp->num_actions();
  switch (spec.init) {
    case InitKind::kUniform:
      return PolicyParams(states, actions, 0.0);
    case InitKind::kExplicit: {
      if (spec.init_logits.size() != states * actions)
        throw InvalidArgument("spec: explicit init has wrong size");
      PolicyParams p(states, actions);
      p.logits = spec.init_logits;
      return p;
    }
    case InitKind::kAdversarialMdp:
      if (spec.is_bandit())
        throw InvalidArgument("spec: adversarial opt-prob init needs an MDP");
      return adversarial_tree_init(*spec.mdp, spec.adversarial_opt_prob);
  }
  throw InvalidArgument("spec: bad init");
}

RunResult run_single_bandit(const ExperimentSpec& spec, std::uint64_t seed,
                            std::uint64_t run_id,
                            const std::vector<std::uint64_t>& schedule) {
  const BanditInstance& inst = *spec.bandit;
  const std::size_t k = inst.num_actions();
  const std::size_t a_star = inst.optimal_action();
  const double r_star = inst.mean(a_star);
  const double escape_gap = inst.reward_gap() / 2.0;

  PolicyParams params = resolve_init(spec);
  CounterRng rng(seed, run_id);
  std::vector<double> pi(k);

  RunResult out;
  out.summary.run_id = run_id;
  out.summary.seed = seed;
  out.bandit_rows.reserve(schedule.size());

  auto record = [&](std::uint64_t t, double eta) {
    softmax_row(params.row(0), pi);
    double b = expected_reward(inst, pi);
    out.bandit_rows.push_back({t, b, r_star - b, pi[a_star], eta});
  };

  std::size_t next_record = 0;
  if (!schedule.empty() && schedule[0] == 0) {
    record(0, 0.0);
    next_record = 1;
  }

  double prev_b = 0.0;
  bool have_prev = false;
  std::uint64_t failed_at = 0;
  try {
    for (std::uint64_t t = 1; t <= spec.iterations; ++t) {
      failed_at = t;
      softmax_row(params.row(0), pi);
      StepTrace trace =
          step_bandit_row(params.row(0), pi, inst, spec.update, rng, t,
                          spec.forced_action);
      if (have_prev && trace.expected_reward < prev_b - 1e-12)
        ++out.summary.monotonicity_violations;
      prev_b = trace.expected_reward;
      have_prev = true;
      if (next_record < schedule.size() && schedule[next_record] == t) {
        record(t, trace.eta);
        ++next_record;
      }
    }
    // compare the final policy against the last pre-update value
    softmax_row(params.row(0), pi);
    if (have_prev && expected_reward(inst, pi) < prev_b - 1e-12)
      ++out.summary.monotonicity_violations;
  } catch (const NumericalFailure& e) {
    out.summary.failure = e.what();
    // failure events are always retained; pi still holds the pre-update
    // policy of the failing step
    double b = expected_reward(inst, pi);
    out.bandit_rows.push_back({failed_at, b, r_star - b, pi[a_star], 0.0});
  }

  if (out.bandit_rows.empty()) record(0, 0.0);
  const auto& rows = out.bandit_rows;
  out.summary.final_value = rows.back().expected_reward;
  out.summary.final_gap = rows.back().gap;
  out.summary.final_opt_prob = rows.back().pi_opt;
  for (const auto& row : rows) {
    out.summary.min_opt_prob = std::min(out.summary.min_opt_prob, row.pi_opt);
    if (!out.summary.escaped_plateau && row.gap < escape_gap) {
      out.summary.escaped_plateau = true;
      out.summary.escape_time = static_cast<double>(row.t);
    }
  }
  return out;
}

RunResult run_single_mdp(const ExperimentSpec& spec, std::uint64_t seed,
                         std::uint64_t run_id,
                         const std::vector<std::uint64_t>& schedule) {
  const TabularMdp& mdp = *spec.mdp;
  Algorithm1Run run(mdp, resolve_init(spec), spec.alg1_eta, seed, run_id);

  RunResult out;
  out.summary.run_id = run_id;
  out.summary.seed = seed;
  out.mdp_rows.reserve(schedule.size());

  auto record = [&](std::uint64_t t) {
    out.mdp_rows.push_back({t, run.v_rho(), run.v_mu(),
                            run.v_star_rho() - run.v_rho(), run.min_pi_opt()});
  };

  std::size_t next_record = 0;
  if (!schedule.empty() && schedule[0] == 0) {
    record(0);
    next_record = 1;
  }
  std::uint64_t failed_at = 0;
  try {
    for (std::uint64_t t = 1; t <= spec.iterations; ++t) {
      failed_at = t;
      run.step();
      if (next_record < schedule.size() && schedule[next_record] == t) {
        record(t);
        ++next_record;
      }
    }
  } catch (const NumericalFailure& e) {
    out.summary.failure = e.what();
    record(failed_at);  // failure events are always retained
  }

  if (out.mdp_rows.empty()) record(0);
  out.summary.monotonicity_violations = run.monotonicity_violations();
  const auto& rows = out.mdp_rows;
  out.summary.final_value = rows.back().v_rho;
  out.summary.final_gap = rows.back().gap_rho;
  out.summary.final_opt_prob = rows.back().min_pi_opt;
  for (const auto& row : rows) {
    out.summary.min_opt_prob = std::min(out.summary.min_opt_prob, row.min_pi_opt);
    if (!out.summary.escaped_plateau && row.gap_rho < kMdpEscapeGap) {
      out.summary.escaped_plateau = true;
      out.summary.escape_time = static_cast<double>(row.t);
    }
  }
  return out;
}

void write_trace_csv(const std::string& path, const RunResult& result, bool is_bandit) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw InvalidArgument("cannot open trace file " + path);
  if (is_bandit) {
    file << "t,expected_reward,gap,pi_opt,eta_t\n";
    for (const auto& row : result.bandit_rows)
      file << row.t << ',' << fmt(row.expected_reward) << ',' << fmt(row.gap) << ','
           << fmt(row.pi_opt) << ',' << fmt(row.eta) << '\n';
  } else {
    file << "t,v_rho,v_mu,gap_rho,min_pi_opt\n";
    for (const auto& row : result.mdp_rows)
      file << row.t << ',' << fmt(row.v_rho) << ',' << fmt(row.v_mu) << ','
           << fmt(row.gap_rho) << ',' << fmt(row.min_pi_opt) << '\n';
  }
}

}  // namespace

std::vector<std::uint64_t> record_schedule(std::uint64_t horizon) {
  std::vector<std::uint64_t> points;
  for (std::uint64_t t = 0; t <= std::min<std::uint64_t>(horizon, 100); ++t)
    points.push_back(t);
  if (horizon > 100) {
    const int n = 1000;
    double lo = std::log(101.0), hi = std::log(static_cast<double>(horizon));
    for (int i = 0; i <= n; ++i) {
      double x = std::exp(lo + (hi - lo) * static_cast<double>(i) / n);
      points.push_back(static_cast<std::uint64_t>(std::llround(x)));
    }
    points.push_back(horizon);
  }
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  return points;
}

RunResult run_single(const ExperimentSpec& spec, std::uint64_t seed,
                     std::uint64_t run_id) {
  auto schedule = record_schedule(spec.iterations);
  return spec.is_bandit() ? run_single_bandit(spec, seed, run_id, schedule)
                          : run_single_mdp(spec, seed, run_id, schedule);
}

std::vector<RunSummary> run_experiment(const ExperimentSpec& spec,
                                       const std::string& out_dir, unsigned threads) {
  if (spec.seeds.empty()) throw InvalidArgument("spec: seed list is empty");
  if (spec.iterations < 1) throw InvalidArgument("spec: iterations must be >= 1");
  namespace fs = std::filesystem;
  fs::path dir = fs::path(out_dir) / (spec.outputs.empty() ? spec.name : spec.outputs);
  fs::create_directories(dir);

  auto schedule = record_schedule(spec.iterations);
  std::vector<RunResult> results(spec.seeds.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= spec.seeds.size()) return;
      results[i] = spec.is_bandit()
                       ? run_single_bandit(spec, spec.seeds[i], i, schedule)
                       : run_single_mdp(spec, spec.seeds[i], i, schedule);
    }
  };
  unsigned n_workers = std::max(1u, std::min<unsigned>(threads, spec.seeds.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<RunSummary> summaries;
  for (std::size_t i = 0; i < results.size(); ++i) {
    std::ostringstream name;
    name << "run_" << i << "_seed_" << spec.seeds[i] << ".csv";
    fs::path trace_path = dir / name.str();
    write_trace_csv(trace_path.string(), results[i], spec.is_bandit());
    results[i].summary.trace_file = name.str();
    summaries.push_back(results[i].summary);
  }

  std::ofstream index(dir / "summary.json", std::ios::binary);
  index << summaries_to_json(spec, summaries) << '\n';
  return summaries;
}

std::string summaries_to_json(const ExperimentSpec& spec,
                              const std::vector<RunSummary>& summaries) {
  nlohmann::json j;
  j["spec"] = spec.name;
  j["environment"] = spec.is_bandit() ? "bandit" : "mdp";
  j["iterations"] = spec.iterations;
  j["seeds"] = spec.seeds;
  auto runs = nlohmann::json::array();
  for (const auto& s : summaries) {
    nlohmann::json r;
    r["run_id"] = s.run_id;
    r["seed"] = s.seed;
    r["final_value"] = s.final_value;
    r["final_gap"] = s.final_gap;
    r["final_opt_prob"] = s.final_opt_prob;
    r["min_opt_prob"] = s.min_opt_prob;
    r["escaped_plateau"] = s.escaped_plateau;
    if (s.escaped_plateau) r["escape_time"] = s.escape_time;
    r["monotonicity_violations"] = s.monotonicity_violations;
    if (s.failure) r["failure"] = *s.failure;
    if (!s.trace_file.empty()) r["trace_file"] = s.trace_file;
    runs.push_back(r);
  }
  j["runs"] = runs;
  return j.dump(2);
}

double failure_rate(const std::vector<RunSummary>& summaries, double threshold) {
  if (summaries.empty()) throw InvalidArgument("failure_rate: no runs");
  std::size_t failures = 0;
  for (const auto& s : summaries)
    // a run that blew up before the horizon is also a failed run
    if (s.failure || s.final_opt_prob < threshold) ++failures;
  return static_cast<double>(failures) / static_cast<double>(summaries.size());
}

double failure_rate(const ExperimentSpec& spec, double threshold, unsigned threads) {
  if (spec.seeds.empty()) throw InvalidArgument("failure_rate: no seeds");
  std::vector<RunSummary> summaries(spec.seeds.size());
  auto schedule = record_schedule(spec.iterations);
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      std::size_t i = cursor.fetch_add(1);
      if (i >= spec.seeds.size()) return;
      summaries[i] = spec.is_bandit()
                         ? run_single_bandit(spec, spec.seeds[i], i, schedule).summary
                         : run_single_mdp(spec, spec.seeds[i], i, schedule).summary;
    }
  };
  unsigned n_workers = std::max(1u, std::min<unsigned>(threads, spec.seeds.size()));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return failure_rate(summaries, threshold);
}

std::map<std::string, std::vector<double>> read_csv_columns(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw InvalidArgument("cannot open " + path);
  std::string line;
  if (!std::getline(file, line)) throw InvalidArgument("empty CSV " + path);
  std::vector<std::string> headers;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) headers.push_back(cell);
  }
  std::map<std::string, std::vector<double>> columns;
  for (const auto& h : headers) columns[h] = {};
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',') && i < headers.size())
      columns[headers[i++]].push_back(std::stod(cell));
  }
  return columns;
}

void ExperimentSpec::rebase_seeds(std::uint64_t seed_base) {
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = seed_base + i;
}

ExperimentSpec ExperimentSpec::preset(const std::string& name) {
  ExperimentSpec spec;
  spec.name = name;
  spec.outputs = name;
  if (name == "bandit-uniform-deterministic") {
    spec.bandit = benchmark_bandit_instance();
    spec.init = InitKind::kUniform;
    spec.update.estimator = EstimatorKind::kSimplifiedIS;
    spec.update.baseline = true;
    spec.update.step = StepSizeRule::constant(0.1);
    spec.iterations = 1'000'000;
    spec.seeds.resize(20);
    spec.rebase_seeds(1);
    return spec;
  }
  if (name == "bandit-adversarial-stochastic") {
    spec.bandit = benchmark_bandit_instance();
    spec.init = InitKind::kExplicit;
    spec.init_logits.assign(20, 0.0);
    spec.init_logits[1] = 5.0;  // best suboptimal action starts dominant
    spec.update.estimator = EstimatorKind::kStochasticIS;
    spec.update.baseline = true;
    spec.update.step = StepSizeRule::adaptive(4.0, 0.5, 9.0);
    spec.iterations = 20'000'000;
    spec.seeds.resize(5);
    spec.rebase_seeds(1);
    return spec;
  }
  if (name == "tree-adversarial") {
    spec.mdp = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
    spec.init = InitKind::kAdversarialMdp;
    spec.adversarial_opt_prob = 0.07;
    spec.alg1_eta = 0.1;
    spec.iterations = 10'000'000;
    spec.seeds = {1};
    return spec;
  }
  if (name == "bandit-failure-no-baseline" || name == "bandit-failure-with-baseline") {
    std::vector<RewardDistribution> dists(2);
    dists[0].support = {{1.0, 1.0}};
    dists[1].support = {{0.9, 1.0}};
    spec.bandit = BanditInstance({1.0, 0.9}, std::move(dists), 1.0);
    spec.init = InitKind::kUniform;
    spec.update.estimator = EstimatorKind::kSimplifiedIS;
    spec.update.baseline = name == "bandit-failure-with-baseline";
    spec.update.step = StepSizeRule::constant(2.0);
    spec.iterations = 100'000;
    spec.seeds.resize(200);
    spec.rebase_seeds(1);
    return spec;
  }
  throw InvalidArgument("unknown preset '" + name + "'");
}

ExperimentSpec ExperimentSpec::from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  ExperimentSpec spec;
  spec.name = j.value("name", "experiment");
  spec.outputs = j.value("outputs", spec.name);

  const auto& env = j.at("environment");
  std::string type = env.at("type").get<std::string>();
  if (type == "bandit") {
    if (env.contains("preset")) {
      if (env.at("preset").get<std::string>() != "benchmark")
        throw InvalidArgument("spec: unknown bandit preset");
      spec.bandit = benchmark_bandit_instance();
    } else {
      spec.bandit = BanditInstance::from_json(env.at("instance").dump());
    }
  } else if (type == "mdp") {
    if (env.contains("preset")) {
      if (env.at("preset").get<std::string>() != "benchmark-tree")
        throw InvalidArgument("spec: unknown mdp preset");
      spec.mdp = tree_mdp(4, 4, {1.0, 0.9, 0.8, 0.2}, 0.9, 0.2);
    } else if (env.contains("tree")) {
      const auto& tr = env.at("tree");
      spec.mdp = tree_mdp(tr.at("depth").get<std::size_t>(),
                          tr.at("branch").get<std::size_t>(),
                          tr.at("rewards").get<std::vector<double>>(),
                          tr.at("gamma").get<double>(),
                          tr.value("mu_root_mass", 0.2));
    } else {
      spec.mdp = TabularMdp::from_json(env.at("instance").dump());
    }
  } else {
    throw InvalidArgument("spec: environment type must be bandit or mdp");
  }

  if (j.contains("init")) {
    const auto& init = j.at("init");
    if (init.is_string() && init.get<std::string>() == "uniform") {
      spec.init = InitKind::kUniform;
    } else if (init.contains("explicit") || init.contains("adversarial_theta")) {
      spec.init = InitKind::kExplicit;
      spec.init_logits = init.contains("explicit")
                             ? init.at("explicit").get<std::vector<double>>()
                             : init.at("adversarial_theta").get<std::vector<double>>();
    } else if (init.contains("adversarial_opt_prob")) {
      spec.init = InitKind::kAdversarialMdp;
      spec.adversarial_opt_prob = init.at("adversarial_opt_prob").get<double>();
    } else {
      throw InvalidArgument("spec: bad init");
    }
  }

  if (spec.is_bandit()) {
    const auto& up = j.at("update");
    std::string est = up.value("estimator", "simplified");
    if (est == "simplified")
      spec.update.estimator = EstimatorKind::kSimplifiedIS;
    else if (est == "stochastic")
      spec.update.estimator = EstimatorKind::kStochasticIS;
    else
      throw InvalidArgument("spec: estimator must be simplified or stochastic");
    spec.update.baseline = up.value("baseline", true);
    spec.update.step = step_rule_from_json(up.at("step"));
    if (up.contains("forced_action") && !up.at("forced_action").is_null())
      spec.forced_action = up.at("forced_action").get<std::size_t>();
  } else {
    spec.alg1_eta = j.value("eta", 0.1);
  }

  spec.iterations = j.at("iterations").get<std::uint64_t>();
  if (spec.iterations < 1) throw InvalidArgument("spec: iterations must be >= 1");
  if (j.contains("seeds")) {
    spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  } else if (j.contains("seed_count")) {
    spec.seeds.resize(j.at("seed_count").get<std::size_t>());
    spec.rebase_seeds(1);
  } else {
    spec.seeds = {1};
  }
  return spec;
}

ExperimentSpec ExperimentSpec::load(const std::string& name_or_path) {
  try {
    return preset(name_or_path);
  } catch (const InvalidArgument&) {
  }
  std::ifstream file(name_or_path);
  if (!file)
    throw InvalidArgument("'" + name_or_path +
                          "' is neither a preset nor a readable spec file");
  std::ostringstream ss;
  ss << file.rdbuf();
  return from_json(ss.str());
}

}  // namespace npglab
