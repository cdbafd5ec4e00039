#include "optnet/pricing/black_scholes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/math/normal.hpp"

namespace optnet::pricing {

namespace {

void check_inputs(const BsInputs& in) {
  if (!std::isfinite(in.m) || !std::isfinite(in.tau) || !std::isfinite(in.r) ||
      !std::isfinite(in.sigma)) {
    throw DomainError("Black-Scholes: non-finite input");
  }
  if (in.m <= 0.0) throw DomainError("Black-Scholes: moneyness must be positive");
  if (in.tau <= 0.0) throw DomainError("Black-Scholes: tau must be positive");
  if (in.sigma <= 0.0) throw DomainError("Black-Scholes: sigma must be positive");
}

struct D12 {
  double d1;
  double d2;
};

D12 d_terms(const BsInputs& in) {
  const double vol_sqrt_t = in.sigma * std::sqrt(in.tau);
  const double d1 = (std::log(in.m) + (in.r + 0.5 * in.sigma * in.sigma) * in.tau) / vol_sqrt_t;
  return {d1, d1 - vol_sqrt_t};
}

}  // namespace

double intrinsic_scaled(double m, double tau, double r) {
  return std::max(0.0, m - std::exp(-r * tau));
}

double bs_scaled_call(const BsInputs& in) {
  check_inputs(in);
  const auto [d1, d2] = d_terms(in);
  const double discount = std::exp(-in.r * in.tau);
  if (in.m > discount) {
    // In the money: intrinsic plus the (small, accurately computed) put value.
    const double put = discount * std_normal_cdf(-d2) - in.m * std_normal_cdf(-d1);
    return (in.m - discount) + std::max(0.0, put);
  }
  return std::max(0.0, in.m * std_normal_cdf(d1) - discount * std_normal_cdf(d2));
}

double bs_vega_scaled(const BsInputs& in) {
  check_inputs(in);
  return in.m * std_normal_pdf(d_terms(in).d1) * std::sqrt(in.tau);
}

double implied_vol(double price, double m, double tau, double r,
                   const ImpliedVolOptions& options) {
  if (!std::isfinite(price)) throw DomainError("implied_vol: non-finite price");
  const double intrinsic = intrinsic_scaled(m, tau, r);
  if (!(price > intrinsic && price < m)) {
    throw NoSolutionError("implied_vol: price " + std::to_string(price) +
                          " outside the no-arbitrage band (" + std::to_string(intrinsic) +
                          ", " + std::to_string(m) + ")");
  }
  auto excess = [&](double sigma) { return bs_scaled_call({m, tau, r, sigma}) - price; };

  double lo = options.lower;
  double hi = options.upper;
  if (excess(lo) > 0.0 || excess(hi) < 0.0) {
    throw NoSolutionError("implied_vol: solution outside [" + std::to_string(lo) + ", " +
                          std::to_string(hi) + "]");
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  double sigma = std::clamp(options.initial_sigma, lo, hi);
  double step_before_last = hi - lo;
  double last_step = step_before_last;
  for (int it = 0; it < options.max_iterations; ++it) {
    const double f = excess(sigma);
    if (f == 0.0) return sigma;
    (f > 0.0 ? hi : lo) = sigma;
    if (hi - lo <= 4.0 * eps * hi) return 0.5 * (lo + hi);

    // Newton, unless it leaves the bracket or is not at least halving the
    // step every two iterations (slow creep in the far tails).
    const double vega = bs_vega_scaled({m, tau, r, sigma});
    double next = vega > 0.0 ? sigma - f / vega : lo;
    if (!(next > lo && next < hi) || 2.0 * std::abs(next - sigma) > step_before_last) {
      next = 0.5 * (lo + hi);
    }
    step_before_last = last_step;
    last_step = std::abs(next - sigma);
    if (last_step <= 2.0 * eps * sigma) return next;
    sigma = next;
  }
  throw ConvergenceError("implied_vol: no convergence after " +
                         std::to_string(options.max_iterations) + " iterations");
}

double time_value_forward(double price, double m, double tau, double r) {
  if (!std::isfinite(price)) throw DomainError("time_value_forward: non-finite price");
  const double intrinsic = intrinsic_scaled(m, tau, r);
  const double time_value = price - intrinsic;
  if (time_value < -1e-12) {
    throw DomainError("time_value_forward: price below intrinsic value");
  }
  return std::log(std::max(time_value, kTimeValueFloor));
}

double time_value_inverse(double logtv, double m, double tau, double r) {
  if (!std::isfinite(logtv)) throw DomainError("time_value_inverse: non-finite input");
  return std::exp(logtv) + intrinsic_scaled(m, tau, r);
}

}  // namespace optnet::pricing
