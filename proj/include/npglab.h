/* C interface to the npglab core: experiment runs, verification suites and
 * trace analysis behind opaque handles and error codes. Strings returned
 * through char** out-parameters are heap-allocated; release them with
 * npg_string_free. All functions return NPG_OK (0) on success; on failure
 * npg_last_error() describes the most recent error on the calling thread.
 */
#ifndef NPGLAB_H
#define NPGLAB_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum npg_status {
  NPG_OK = 0,
  NPG_ERR_INVALID_ARGUMENT = 1,
  NPG_ERR_NUMERICAL = 2,
  NPG_ERR_SOLVE = 3,
  NPG_ERR_DEGENERATE = 4,
  NPG_ERR_EMPTY_WINDOW = 5,
  NPG_ERR_SATURATED = 6,
  NPG_ERR_PARSE = 7,
  NPG_ERR_IO = 8,
  NPG_ERR_INTERNAL = 9
} npg_status;

const char* npg_status_name(int status);

/* Message for the last failing call on this thread ("" if none). */
const char* npg_last_error(void);

void npg_string_free(char* text);

/* ---- experiments ---------------------------------------------------- */

typedef struct npg_experiment npg_experiment;

/* Presets: bandit-uniform-deterministic, bandit-adversarial-stochastic,
 * tree-adversarial, bandit-failure-no-baseline,
 * bandit-failure-with-baseline. */
int npg_experiment_from_preset(const char* name, npg_experiment** out);
int npg_experiment_from_json(const char* spec_json, npg_experiment** out);
/* Resolves a preset name, falling back to a spec JSON file path. */
int npg_experiment_load(const char* name_or_path, npg_experiment** out);
void npg_experiment_free(npg_experiment* exp);

/* Replaces the seed list with seed_base, seed_base+1, ... (same count). */
int npg_experiment_rebase_seeds(npg_experiment* exp, uint64_t seed_base);
int npg_experiment_set_iterations(npg_experiment* exp, uint64_t iterations);

/* Runs every seed, writing one trace CSV per run plus summary.json under
 * out_dir/<spec name>/. Returns the summary JSON. Deterministic for a
 * fixed spec regardless of thread count. */
int npg_experiment_run(const npg_experiment* exp, const char* out_dir,
                       unsigned threads, char** summary_json_out);

/* Fraction of seeds whose final optimal-action probability fell below
 * threshold (runs in memory, writes nothing). */
int npg_experiment_failure_rate(const npg_experiment* exp, double threshold,
                                unsigned threads, double* fraction_out);

/* ---- verification ---------------------------------------------------- */

/* Suites: lemma1, lemma3, domination, nl-coeff, variance, smoothness,
 * perf-diff, products, all. Writes the JSON report of
 * {check, params, slack, pass} entries and the number of failing checks. */
int npg_verify(const char* suite, char** report_json_out, int* failures_out);

/* ---- trace analysis --------------------------------------------------- */

/* Least-squares slope of log(gap) on log(t) for samples inside
 * [t_lo, t_hi], reading columns t and gap (bandit traces) or gap_rho (MDP
 * traces) from the CSV. */
int npg_analyze_slope(const char* csv_path, double t_lo, double t_hi,
                      double* slope_out, double* r2_out);

/* Committal-rate fit on a forced-action trace CSV over samples with t in
 * [t_lo, t_hi]: decay exponent of 1 - pi_opt and whether the decay is
 * faster than polynomial. */
int npg_analyze_committal(const char* csv_path, double t_lo, double t_hi,
                          double* exponent_out, int* superpolynomial_out);

/* Failure fraction from a summary.json written by npg_experiment_run. */
int npg_analyze_failure(const char* summary_json_path, double threshold,
                        double* fraction_out);

/* ---- model serialization ---------------------------------------------- */

/* JSON of the 20-action two-point-reward instance used by the presets. */
int npg_benchmark_bandit_json(char** json_out);

/* JSON of a tree MDP (see the tree preset: depth 4, branch 4,
 * rewards (1.0, 0.9, 0.8, 0.2), gamma 0.9, root mass 0.2). */
int npg_tree_mdp_json(size_t depth, size_t branch, const double* rewards,
                      size_t n_rewards, double gamma, double mu_root_mass,
                      char** json_out);

#ifdef __cplusplus
}
#endif

#endif /* NPGLAB_H */
