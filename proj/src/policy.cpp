#include "npglab/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "npglab/errors.hpp"

namespace npglab {

bool PolicyParams::finite() const {
  return std::all_of(logits.begin(), logits.end(),
                     [](double v) { return std::isfinite(v); });
}

void PolicyVector::validate() const {
  for (std::size_t s = 0; s < states; ++s) {
    double sum = 0.0;
    for (double p : row(s)) {
      if (!(p > 0.0) || !(p < 1.0 + 1e-12))
        throw NumericalFailure("PolicyVector: probability outside (0,1) in state " +
                               std::to_string(s));
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw NumericalFailure("PolicyVector: row sum off by " +
                             std::to_string(sum - 1.0) + " in state " +
                             std::to_string(s));
  }
}

void softmax_row(std::span<const double> logits, std::span<double> out) {
  double max_logit = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    if (!std::isfinite(v)) throw NumericalFailure("softmax: non-finite logit");
    max_logit = std::max(max_logit, v);
  }
  double z = 0.0;
  for (std::size_t a = 0; a < logits.size(); ++a) {
    out[a] = std::exp(logits[a] - max_logit);
    z += out[a];
  }
  for (std::size_t a = 0; a < logits.size(); ++a) out[a] /= z;
}

std::vector<double> softmax(const PolicyParams& params, std::size_t state) {
  std::vector<double> out(params.actions);
  softmax_row(params.row(state), out);
  return out;
}

PolicyVector softmax_all(const PolicyParams& params) {
  PolicyVector pi(params.states, params.actions);
  for (std::size_t s = 0; s < params.states; ++s) softmax_row(params.row(s), pi.row(s));
  return pi;
}

std::vector<double> policy_jacobian_row(const PolicyVector& pi, std::size_t state,
                                        std::size_t action) {
  auto p = pi.row(state);
  std::vector<double> grad(pi.actions);
  double pa = p[action];
  for (std::size_t j = 0; j < pi.actions; ++j)
    grad[j] = pa * ((j == action ? 1.0 : 0.0) - p[j]);
  return grad;
}

void recenter_row_inplace(std::span<double> logits) {
  double mean = 0.0;
  for (double v : logits) mean += v;
  mean /= static_cast<double>(logits.size());
  for (double& v : logits) v -= mean;
}

PolicyParams recenter(const PolicyParams& params) {
  if (!params.finite()) throw NumericalFailure("recenter: non-finite logits");
  PolicyParams out = params;
  for (std::size_t s = 0; s < out.states; ++s) recenter_row_inplace(out.row(s));
  return out;
}

}  // namespace npglab
