#pragma once

#include <span>

namespace mimpact {

/// Ordinary least squares y = intercept + slope * x.
struct LinearFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double intercept_se = 0.0;
  double rss = 0.0;
  std::size_t n = 0;
};

/// Throws std::invalid_argument when sizes differ, n < 2 or all x are equal.
LinearFit fit_linear(std::span<const double> xs, std::span<const double> ys);

}  // namespace mimpact
