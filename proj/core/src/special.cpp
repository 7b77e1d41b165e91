#include "linkpmf/special.hpp"

#include <cmath>
#include <limits>

#include "linkpmf/common.hpp"

namespace linkpmf {

double digamma(double x) {
  if (std::isnan(x) || x <= 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double shift = 0.0;
  while (x < 10.0) {
    shift -= 1.0 / x;
    x += 1.0;
  }
  // Bernoulli-number coefficients B_2k / (2k) of the asymptotic series.
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  const double series =
      inv2 * (1.0 / 12 -
              inv2 * (1.0 / 120 -
                      inv2 * (1.0 / 252 -
                              inv2 * (1.0 / 240 -
                                      inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12))))));
  return shift + std::log(x) - 0.5 * inv - series;
}

double log_expm1(double psi) {
  if (!(psi > 0.0)) {
    throw Error("log_expm1: rate must be positive, got " + std::to_string(psi));
  }
  if (psi < 1.0) {
    return std::log(std::expm1(psi));
  }
  return psi + std::log1p(-std::exp(-psi));
}

double ztp_mean(double theta) {
  if (theta < 1e-6) {
    return 1.0 + theta * (0.5 + theta / 12.0);
  }
  return theta / -std::expm1(-theta);
}

}  // namespace linkpmf
