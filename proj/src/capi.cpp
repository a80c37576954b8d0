#include "npglab.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "npglab/analyze.hpp"
#include "npglab/errors.hpp"
#include "npglab/harness.hpp"
#include "npglab/verify.hpp"

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return NPG_OK;
  } catch (const npglab::InvalidArgument& e) {
    g_last_error = e.what();
    return NPG_ERR_INVALID_ARGUMENT;
  } catch (const npglab::NumericalFailure& e) {
    g_last_error = e.what();
    return NPG_ERR_NUMERICAL;
  } catch (const npglab::SolveFailure& e) {
    g_last_error = e.what();
    return NPG_ERR_SOLVE;
  } catch (const npglab::DegenerateInstance& e) {
    g_last_error = e.what();
    return NPG_ERR_DEGENERATE;
  } catch (const npglab::EmptyWindow& e) {
    g_last_error = e.what();
    return NPG_ERR_EMPTY_WINDOW;
  } catch (const npglab::SaturatedTrace& e) {
    g_last_error = e.what();
    return NPG_ERR_SATURATED;
  } catch (const nlohmann::json::exception& e) {
    g_last_error = e.what();
    return NPG_ERR_PARSE;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return NPG_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return NPG_ERR_INTERNAL;
  }
}

int require(bool ok, const char* message) {
  if (ok) return NPG_OK;
  g_last_error = message;
  return NPG_ERR_INVALID_ARGUMENT;
}

}  // namespace

struct npg_experiment {
  npglab::ExperimentSpec spec;
};

extern "C" {

const char* npg_status_name(int status) {
  switch (status) {
    case NPG_OK: return "ok";
    case NPG_ERR_INVALID_ARGUMENT: return "invalid argument";
    case NPG_ERR_NUMERICAL: return "numerical failure";
    case NPG_ERR_SOLVE: return "solve failure";
    case NPG_ERR_DEGENERATE: return "degenerate instance";
    case NPG_ERR_EMPTY_WINDOW: return "empty window";
    case NPG_ERR_SATURATED: return "saturated trace";
    case NPG_ERR_PARSE: return "parse error";
    case NPG_ERR_IO: return "io error";
    default: return "internal error";
  }
}

const char* npg_last_error(void) { return g_last_error.c_str(); }

void npg_string_free(char* text) { delete[] text; }

int npg_experiment_from_preset(const char* name, npg_experiment** out) {
  if (int rc = require(name && out, "null argument")) return rc;
  return guarded([&] {
    *out = new npg_experiment{npglab::ExperimentSpec::preset(name)};
  });
}

int npg_experiment_from_json(const char* spec_json, npg_experiment** out) {
  if (int rc = require(spec_json && out, "null argument")) return rc;
  return guarded([&] {
    *out = new npg_experiment{npglab::ExperimentSpec::from_json(spec_json)};
  });
}

int npg_experiment_load(const char* name_or_path, npg_experiment** out) {
  if (int rc = require(name_or_path && out, "null argument")) return rc;
  return guarded([&] {
    *out = new npg_experiment{npglab::ExperimentSpec::load(name_or_path)};
  });
}

void npg_experiment_free(npg_experiment* exp) { delete exp; }

int npg_experiment_rebase_seeds(npg_experiment* exp, uint64_t seed_base) {
  if (int rc = require(exp != nullptr, "null experiment")) return rc;
  return guarded([&] { exp->spec.rebase_seeds(seed_base); });
}

int npg_experiment_set_iterations(npg_experiment* exp, uint64_t iterations) {
  if (int rc = require(exp && iterations > 0, "null experiment or iterations == 0"))
    return rc;
  return guarded([&] { exp->spec.iterations = iterations; });
}

int npg_experiment_run(const npg_experiment* exp, const char* out_dir,
                       unsigned threads, char** summary_json_out) {
  if (int rc = require(exp && out_dir && summary_json_out, "null argument")) return rc;
  return guarded([&] {
    auto summaries = npglab::run_experiment(exp->spec, out_dir, threads);
    *summary_json_out = dup_string(npglab::summaries_to_json(exp->spec, summaries));
  });
}

int npg_experiment_failure_rate(const npg_experiment* exp, double threshold,
                                unsigned threads, double* fraction_out) {
  if (int rc = require(exp && fraction_out, "null argument")) return rc;
  return guarded([&] {
    *fraction_out = npglab::failure_rate(exp->spec, threshold, threads);
  });
}

int npg_verify(const char* suite, char** report_json_out, int* failures_out) {
  if (int rc = require(suite && report_json_out && failures_out, "null argument"))
    return rc;
  return guarded([&] {
    auto results = npglab::verify_suite(suite);
    int failures = 0;
    for (const auto& r : results)
      if (!r.pass) ++failures;
    *report_json_out = dup_string(npglab::report_to_json(results));
    *failures_out = failures;
  });
}

int npg_analyze_slope(const char* csv_path, double t_lo, double t_hi,
                      double* slope_out, double* r2_out) {
  if (int rc = require(csv_path && slope_out && r2_out, "null argument")) return rc;
  return guarded([&] {
    auto columns = npglab::read_csv_columns(csv_path);
    if (!columns.count("t"))
      throw npglab::InvalidArgument("trace has no 't' column");
    const char* gap_column =
        columns.count("gap") ? "gap" : columns.count("gap_rho") ? "gap_rho" : nullptr;
    if (!gap_column)
      throw npglab::InvalidArgument("trace has neither 'gap' nor 'gap_rho'");
    auto fit =
        npglab::fit_rate_slope(columns.at("t"), columns.at(gap_column), t_lo, t_hi);
    *slope_out = fit.slope;
    *r2_out = fit.r2;
  });
}

int npg_analyze_committal(const char* csv_path, double t_lo, double t_hi,
                          double* exponent_out, int* superpolynomial_out) {
  if (int rc = require(csv_path && exponent_out && superpolynomial_out,
                       "null argument"))
    return rc;
  return guarded([&] {
    auto columns = npglab::read_csv_columns(csv_path);
    if (!columns.count("t") || !columns.count("pi_opt"))
      throw npglab::InvalidArgument("trace needs 't' and 'pi_opt' columns");
    const auto& t = columns.at("t");
    const auto& pi_opt = columns.at("pi_opt");
    std::vector<double> ts, complement;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (t[i] < 1.0 || t[i] < t_lo || t[i] > t_hi) continue;
      ts.push_back(t[i]);
      complement.push_back(1.0 - pi_opt[i]);
    }
    if (ts.size() < 2)
      throw npglab::EmptyWindow("committal fit: fewer than two samples in window");
    auto fit = npglab::fit_committal_exponent(ts, complement);
    *exponent_out = fit.exponent;
    *superpolynomial_out =
        fit.model == npglab::CommittalModel::kSuperpolynomial ? 1 : 0;
  });
}

int npg_analyze_failure(const char* summary_json_path, double threshold,
                        double* fraction_out) {
  if (int rc = require(summary_json_path && fraction_out, "null argument")) return rc;
  return guarded([&] {
    std::ifstream file(summary_json_path);
    if (!file)
      throw npglab::InvalidArgument(std::string("cannot open ") + summary_json_path);
    nlohmann::json j = nlohmann::json::parse(file);
    std::vector<npglab::RunSummary> summaries;
    for (const auto& run : j.at("runs")) {
      npglab::RunSummary s;
      s.final_opt_prob = run.at("final_opt_prob").get<double>();
      if (run.contains("failure")) s.failure = run.at("failure").get<std::string>();
      summaries.push_back(std::move(s));
    }
    *fraction_out = npglab::failure_rate(summaries, threshold);
  });
}

int npg_benchmark_bandit_json(char** json_out) {
  if (int rc = require(json_out != nullptr, "null argument")) return rc;
  return guarded([&] {
    *json_out = dup_string(npglab::benchmark_bandit_instance().to_json());
  });
}

int npg_tree_mdp_json(size_t depth, size_t branch, const double* rewards,
                      size_t n_rewards, double gamma, double mu_root_mass,
                      char** json_out) {
  if (int rc = require(rewards && json_out, "null argument")) return rc;
  return guarded([&] {
    std::vector<double> r(rewards, rewards + n_rewards);
    *json_out =
        dup_string(npglab::tree_mdp(depth, branch, r, gamma, mu_root_mass).to_json());
  });
}

}  // extern "C"
