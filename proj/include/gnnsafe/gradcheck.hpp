#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "gnnsafe/errors.hpp"

namespace gnnsafe {

/// Central-difference check of an analytic gradient `grad` against a scalar
/// function `f` at point `x`. Returns
///   max_i |(f(x + eps e_i) - f(x - eps e_i)) / (2 eps) - grad_i| / max(1, |grad_i|).
/// The relative/absolute hybrid denominator keeps tiny gradient entries from
/// inflating the error. Throws NumericError if any probe evaluates non-finite.
template <typename F>
double finite_diff_check(F&& f, std::vector<double> x, const std::vector<double>& grad,
                         double eps = 1e-5) {
  if (x.size() != grad.size()) throw std::invalid_argument("finite_diff_check: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + eps;
    const double fp = f(x);
    x[i] = xi - eps;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("finite_diff_check: non-finite function value");
    const double numeric = (fp - fm) / (2.0 * eps);
    const double err = std::abs(numeric - grad[i]) / std::max(1.0, std::abs(grad[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace gnnsafe
