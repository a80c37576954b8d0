#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "npglab/bandit.hpp"
#include "npglab/mdp.hpp"
#include "npglab/updates.hpp"

namespace npglab {

enum class InitKind { kUniform, kExplicit, kAdversarialMdp };

// A named experiment: one environment, an initialization, an update
// configuration and a seed list. Named presets cover the benchmark studies.
struct ExperimentSpec {
  std::string name;
  std::optional<BanditInstance> bandit;
  std::optional<TabularMdp> mdp;

  InitKind init = InitKind::kUniform;
  std::vector<double> init_logits;     // kExplicit, flattened states x actions
  double adversarial_opt_prob = 0.07;  // kAdversarialMdp

  UpdateConfig update;  // bandit runs
  std::optional<std::size_t> forced_action;
  double alg1_eta = 0.1;  // MDP runs (Algorithm 1 uses a constant step size)

  std::uint64_t iterations = 1;
  std::vector<std::uint64_t> seeds;
  std::string outputs;  // subdirectory for trace files; defaults to name

  bool is_bandit() const { return bandit.has_value(); }

  // Known presets: bandit-uniform-deterministic, bandit-adversarial-
  // stochastic, tree-adversarial, bandit-failure-no-baseline,
  // bandit-failure-with-baseline.
  static ExperimentSpec preset(const std::string& name);
  static ExperimentSpec from_json(const std::string& json);
  // Accepts a preset name or a path to a spec JSON file.
  static ExperimentSpec load(const std::string& name_or_path);

  // Replaces the seed list with seed_base, seed_base+1, ...
  void rebase_seeds(std::uint64_t seed_base);
};

struct BanditTraceRow {
  std::uint64_t t;  // rows describe the policy after t updates
  double expected_reward;
  double gap;
  double pi_opt;
  double eta;  // step size used by update t (0 in the t = 0 row)
};

struct MdpTraceRow {
  std::uint64_t t;
  double v_rho;
  double v_mu;
  double gap_rho;
  double min_pi_opt;
};

struct RunSummary {
  std::uint64_t run_id = 0;
  std::uint64_t seed = 0;
  double final_value = 0.0;  // final expected reward (bandit) or V(rho) (MDP)
  double final_gap = 0.0;
  double final_opt_prob = 0.0;  // pi(a*) (bandit) or min_s pi(a*(s)|s) (MDP)
  double min_opt_prob = 1.0;    // inf over recorded rows
  bool escaped_plateau = false;
  double escape_time = -1.0;  // first recorded t with gap below the escape level
  std::uint64_t monotonicity_violations = 0;
  std::optional<std::string> failure;
  std::string trace_file;
};

struct RunResult {
  RunSummary summary;
  std::vector<BanditTraceRow> bandit_rows;
  std::vector<MdpTraceRow> mdp_rows;
};

// Recording points: every t <= 100, ~1000 log-spaced beyond, plus 0 and the
// horizon. Slope fits need log-uniform coverage.
std::vector<std::uint64_t> record_schedule(std::uint64_t horizon);

// One seeded run, fully in memory. Deterministic in (spec, seed, run_id).
RunResult run_single(const ExperimentSpec& spec, std::uint64_t seed,
                     std::uint64_t run_id);

// Runs every seed (a worker pool when threads > 1), writes one trace CSV
// per run plus a summary JSON under out_dir/<spec.outputs>/. Outputs are
// byte-identical across invocations and thread counts.
std::vector<RunSummary> run_experiment(const ExperimentSpec& spec,
                                       const std::string& out_dir,
                                       unsigned threads = 1);

std::string summaries_to_json(const ExperimentSpec& spec,
                              const std::vector<RunSummary>& summaries);

// Fraction of completed runs whose final optimal-action probability fell
// below `threshold` (converged toward a suboptimal deterministic policy).
double failure_rate(const std::vector<RunSummary>& summaries, double threshold);
double failure_rate(const ExperimentSpec& spec, double threshold,
                    unsigned threads = 1);

// Column-oriented CSV reader for the trace files written above.
std::map<std::string, std::vector<double>> read_csv_columns(const std::string& path);

}  // namespace npglab
