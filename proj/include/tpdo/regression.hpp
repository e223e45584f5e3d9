#pragma once

#include <span>
#include <vector>

namespace tpdo {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::vector<double> residuals;  // y - (slope x + intercept)
  double max_abs_residual() const;
};

/// Ordinary least squares y ~ slope x + intercept; needs two distinct abscissae.
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace tpdo
