#pragma once

#include <complex>
#include <cstddef>

#include "optnet/math/rng.hpp"

namespace optnet::pricing {

/// Heston pricing inputs. Strike is normalised to 1, so S0 = m and prices are
/// per unit strike. vbar is the long-term variance and gamma the vol-of-vol.
struct HestonParams {
  double m;
  double tau;
  double r;
  double rho;
  double kappa;
  double vbar;
  double gamma;
  double v0;
};

struct CosSettings {
  std::size_t n_terms = 512;
  double trunc_width = 10.0;  // interval is c1 +- trunc_width * sqrt(|c2|)
};

/// Reversion speeds below this are clamped before evaluating the closed form.
inline constexpr double kMinKappa = 1e-6;

/// Characteristic function of the log return log(S_T / S0) at (complex) u.
///
/// Uses the formulation whose complex logarithm never crosses its branch cut,
/// rearranged so every 1/gamma^2 factor cancels analytically; it stays accurate
/// down to gamma = 0, where it reduces to Black-Scholes with a deterministic
/// mean-reverting variance.
std::complex<double> heston_char_fn(std::complex<double> u, const HestonParams& p);

/// log of heston_char_fn, without the exp/log round trip.
std::complex<double> heston_log_char_fn(std::complex<double> u, const HestonParams& p);

/// Characteristic function of log(S_T / S0) under Black-Scholes.
std::complex<double> bs_char_fn(std::complex<double> u, double sigma, double tau, double r);

struct Cumulants {
  double c1;
  double c2;
};

/// First two cumulants of log(S_T / S0), by central differences of the log
/// characteristic function around u = 0.
Cumulants heston_cumulants(const HestonParams& p);

/// European call with strike 1 and spot m, by the Fourier-cosine expansion of
/// the put followed by put-call parity. Result lies in [0, m].
double heston_cos_call(const HestonParams& p, const CosSettings& s = {});

struct McEstimate {
  double price;
  double std_error;
};

/// Monte Carlo call price under full-truncation Euler with antithetic pairs.
/// Validation oracle for heston_cos_call; never used for labels.
/// Paths are generated in fixed-size blocks, each from rng.child(block), so
/// the estimate does not depend on the worker count.
McEstimate mc_heston_oracle(const HestonParams& p, std::size_t n_paths, std::size_t n_steps,
                            const RngStream& rng);

/// 250 steps per year, at least one.
std::size_t default_mc_steps(double tau);

}  // namespace optnet::pricing
