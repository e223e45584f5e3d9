#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "tpdo/errors.hpp"

namespace tpdo {

/// The triple (m, rho, delta) of a symbol class S^m_{rho,delta}; lambda is derived.
class ClassParams {
 public:
  ClassParams(double m, double rho, double delta) : m_(m), rho_(rho), delta_(delta) {
    if (!(rho > 0.0 && rho <= 1.0)) throw ValidationError("rho must lie in (0, 1], got " + std::to_string(rho));
    if (!(delta >= 0.0 && delta < 1.0)) throw ValidationError("delta must lie in [0, 1), got " + std::to_string(delta));
    if (!std::isfinite(m)) throw ValidationError("order m must be finite");
  }

  double m() const noexcept { return m_; }
  double rho() const noexcept { return rho_; }
  double delta() const noexcept { return delta_; }
  double lambda() const noexcept { return std::max(0.0, (delta_ - rho_) / 2.0); }

  ClassParams with_order(double m) const { return {m, rho_, delta_}; }

  /// -n[(1-rho)/2 + lambda]: the order at which H^1 -> L^1, L^1 -> weak-L^1 and
  /// L^inf -> BMO bounds hold.
  double endpoint_order(int n) const noexcept { return -n * ((1.0 - rho_) / 2.0 + lambda()); }

  /// -n[(1-rho)|1/p - 1/2| + lambda] for 1 < p < infinity.
  double lp_order(double p, int n) const noexcept {
    return -n * ((1.0 - rho_) * std::fabs(1.0 / p - 0.5) + lambda());
  }

  friend bool operator==(const ClassParams&, const ClassParams&) = default;

 private:
  double m_;
  double rho_;
  double delta_;
};

}  // namespace tpdo
