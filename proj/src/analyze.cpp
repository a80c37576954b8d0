#include "npglab/analyze.hpp"

#include <cmath>
#include <string>

#include "npglab/errors.hpp"

namespace npglab {

FitResult fit_least_squares(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InvalidArgument("fit_least_squares: need at least two samples");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw InvalidArgument("fit_least_squares: degenerate x values");

  FitResult fit;
  fit.n = x.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double e = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += e * e;
  }
  fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

FitResult fit_rate_slope(std::span<const double> t, std::span<const double> gap,
                         double t_lo, double t_hi) {
  if (t.size() != gap.size()) throw InvalidArgument("fit_rate_slope: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t_lo || t[i] > t_hi) continue;
    if (!(gap[i] > 0.0))
      throw InvalidArgument("fit_rate_slope: non-positive gap inside window");
    lx.push_back(std::log(t[i]));
    ly.push_back(std::log(gap[i]));
  }
  if (lx.size() < 2)
    throw EmptyWindow("fit_rate_slope: fewer than two samples in [" +
                      std::to_string(t_lo) + ", " + std::to_string(t_hi) + "]");
  return fit_least_squares(lx, ly);
}

CommittalFit fit_committal_exponent(std::span<const double> t,
                                    std::span<const double> one_minus_pi) {
  if (t.size() != one_minus_pi.size())
    throw InvalidArgument("fit_committal_exponent: size mismatch");
  std::vector<double> lt, lv, tv;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (one_minus_pi[i] > 0.0) {
      lt.push_back(std::log(t[i]));
      tv.push_back(t[i]);
      lv.push_back(std::log(one_minus_pi[i]));
    } else {
      // underflowed to an exact zero; nothing after this is usable
      if (i < 50)
        throw SaturatedTrace("fit_committal_exponent: trace saturated after " +
                             std::to_string(i) + " samples");
      break;
    }
  }
  if (lt.size() < 2)
    throw SaturatedTrace("fit_committal_exponent: not enough positive samples");

  CommittalFit fit;
  fit.log_log = fit_least_squares(lt, lv);
  fit.log_linear = fit_least_squares(tv, lv);
  fit.exponent = -fit.log_log.slope;
  fit.model = fit.log_linear.r2 > fit.log_log.r2 ? CommittalModel::kSuperpolynomial
                                                 : CommittalModel::kPolynomial;
  return fit;
}

}  // namespace npglab
