#pragma once

namespace optnet::pricing {

/// Black-Scholes inputs in strike-scaled form.
struct BsInputs {
  double m;      // moneyness S0 / K
  double tau;    // years to maturity
  double r;      // risk-free rate per year
  double sigma;  // volatility per sqrt(year)
};

/// Lower no-arbitrage bound of the scaled call, (m - e^{-r tau})^+.
double intrinsic_scaled(double m, double tau, double r);

/// Call price divided by strike: m Phi(d1) - e^{-r tau} Phi(d2).
double bs_scaled_call(const BsInputs& in);

/// d(pi/K)/d sigma = m phi(d1) sqrt(tau).
double bs_vega_scaled(const BsInputs& in);

struct ImpliedVolOptions {
  double initial_sigma = 0.5;
  double lower = 1e-6;
  double upper = 5.0;
  int max_iterations = 100;
};

/// Volatility reproducing the scaled call `price`.
///
/// Newton steps on sigma, falling back to bisection whenever a step leaves the
/// current bracket. Iterates until the bracket collapses to a few ulps, so the
/// result is limited only by the conditioning of the price in sigma.
/// Throws NoSolutionError when price is not strictly inside
/// ((m - e^{-r tau})^+, m) or needs sigma outside [lower, upper], and
/// ConvergenceError after max_iterations.
double implied_vol(double price, double m, double tau, double r,
                   const ImpliedVolOptions& options = {});

/// Smallest scaled time value kept before the log transform; log(1e-8) = -18.4207.
inline constexpr double kTimeValueFloor = 1e-8;

/// log(max(price - intrinsic, floor)). Throws DomainError when the price is
/// below intrinsic by more than 1e-12.
double time_value_forward(double price, double m, double tau, double r);

/// exp(logtv) + intrinsic.
double time_value_inverse(double logtv, double m, double tau, double r);

}  // namespace optnet::pricing
