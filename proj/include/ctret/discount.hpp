#pragma once

#include <cmath>
#include <stdexcept>

namespace ctret {

// gamma^dt via exp(dt * ln gamma); gamma == 1 short-circuits so the
// undiscounted case is exact.
inline double discount_pow(double gamma, double dt) {
  return gamma == 1.0 ? 1.0 : std::exp(dt * std::log(gamma));
}

// Per-second exponential discount, gamma in (0, 1].
struct DiscountSpec {
  double gamma;

  explicit DiscountSpec(double g) : gamma(g) {
    if (!(g > 0.0 && g <= 1.0)) {
      throw std::invalid_argument("discount gamma must be in (0, 1]");
    }
  }

  double factor(double dt) const { return discount_pow(gamma, dt); }
};

}  // namespace ctret
