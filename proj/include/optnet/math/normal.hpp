#pragma once

#include <cmath>
#include <numbers>

namespace optnet {

/// Standard normal CDF through erfc, which keeps relative accuracy in both tails.
inline double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double std_normal_pdf(double x) {
  constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

}  // namespace optnet
