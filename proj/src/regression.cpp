#include "tpdo/regression.hpp"

#include <algorithm>
#include <cmath>

#include "tpdo/errors.hpp"

namespace tpdo {

double LineFit::max_abs_residual() const {
  double r = 0.0;
  for (double v : residuals) r = std::max(r, std::fabs(v));
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ValidationError("fit_line: x and y differ in length");
  if (x.size() < 2) throw ValidationError("fit_line: need at least two points");
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) mx += x[k], my += y[k];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
  }
  if (!(sxx > 0.0)) throw ValidationError("fit_line: abscissae are all equal");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.residuals.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) fit.residuals[k] = y[k] - (fit.slope * x[k] + fit.intercept);
  return fit;
}

}  // namespace tpdo
