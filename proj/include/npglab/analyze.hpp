#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace npglab {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::size_t n = 0;
};

// Ordinary least squares of y on x.
FitResult fit_least_squares(std::span<const double> x, std::span<const double> y);

// Least-squares fit of log(gap) on log(t) over samples with t inside
// [t_lo, t_hi] and gap > 0. Throws EmptyWindow when fewer than two samples
// qualify.
FitResult fit_rate_slope(std::span<const double> t, std::span<const double> gap,
                         double t_lo, double t_hi);

enum class CommittalModel { kPolynomial, kSuperpolynomial };

struct CommittalFit {
  double exponent = 0.0;  // decay exponent alpha from 1 - pi_t ~ t^-alpha
  CommittalModel model = CommittalModel::kPolynomial;
  FitResult log_log;     // log(1-pi) on log(t)
  FitResult log_linear;  // log(1-pi) on t
};

// Classifies a forced-action decay trace. Polynomial decay fits log-log
// linearly; exponential decay fits log(1-pi) against t better, which is
// reported as superpolynomial. Throws SaturatedTrace when 1-pi underflows
// to zero before 50 samples.
CommittalFit fit_committal_exponent(std::span<const double> t,
                                    std::span<const double> one_minus_pi);

}  // namespace npglab
