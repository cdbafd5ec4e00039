#include "optnet/pricing/heston.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "optnet/math/errors.hpp"
#include "optnet/math/parallel.hpp"

namespace optnet::pricing {

using cplx = std::complex<double>;

namespace {

constexpr cplx kI{0.0, 1.0};

// log(1 + z) / z, continuous at z = 0.
cplx log1p_over(cplx z) {
  if (std::abs(z) < 1e-4) return 1.0 - z / 2.0 + z * z / 3.0 - z * z * z / 4.0;
  return std::log(1.0 + z) / z;
}

void check_params(const HestonParams& p) {
  for (double v : {p.m, p.tau, p.r, p.rho, p.kappa, p.vbar, p.gamma, p.v0}) {
    if (!std::isfinite(v)) throw DomainError("Heston: non-finite parameter");
  }
  if (p.m <= 0.0 || p.tau <= 0.0) throw DomainError("Heston: m and tau must be positive");
  if (p.rho < -1.0 || p.rho > 1.0) throw DomainError("Heston: rho outside [-1, 1]");
  if (p.kappa < 0.0 || p.vbar < 0.0 || p.gamma < 0.0) {
    throw DomainError("Heston: kappa, vbar and gamma must be non-negative");
  }
  if (p.v0 <= 0.0) throw DomainError("Heston: v0 must be positive");
}

}  // namespace

cplx heston_log_char_fn(cplx u, const HestonParams& p) {
  if (u == cplx{0.0, 0.0}) return {0.0, 0.0};
  const double kappa = std::max(p.kappa, kMinKappa);
  const double g2 = p.gamma * p.gamma;

  const cplx q = kI * u + u * u;               // iu + u^2
  const cplx a = kappa - p.rho * p.gamma * kI * u;
  const cplx d = std::sqrt(a * a + g2 * q);    // principal root, Re(d) >= 0
  const cplx s = a + d;
  const cplx diff_over_g2 = -q / s;            // (a - d) / gamma^2, no cancellation
  const cplx g = g2 * diff_over_g2 / s;        // (a - d) / (a + d)
  const cplx e = std::exp(-d * p.tau);

  const cplx one_minus_e = 1.0 - e;
  const cplx variance_term = diff_over_g2 * one_minus_e / (1.0 - g * e);

  // log((1 - g e) / (1 - g)) / gamma^2 = log1p(z) / gamma^2, z = g (1 - e) / (1 - g)
  const cplx z_over_g2 = diff_over_g2 / s * one_minus_e / (1.0 - g);
  const cplx z = g2 * z_over_g2;
  const cplx log_term_over_g2 = log1p_over(z) * z_over_g2;
  const cplx mean_term = kappa * p.vbar * (diff_over_g2 * p.tau - 2.0 * log_term_over_g2);

  return kI * u * p.r * p.tau + mean_term + p.v0 * variance_term;
}

cplx heston_char_fn(cplx u, const HestonParams& p) { return std::exp(heston_log_char_fn(u, p)); }

cplx bs_char_fn(cplx u, double sigma, double tau, double r) {
  const double var = sigma * sigma * tau;
  return std::exp(kI * u * (r * tau - 0.5 * var) - 0.5 * var * u * u);
}

Cumulants heston_cumulants(const HestonParams& p) {
  constexpr double h = 1e-3;
  const cplx up = heston_log_char_fn(h, p);
  const cplx dn = heston_log_char_fn(-h, p);
  return {(up - dn).imag() / (2.0 * h), -(up + dn).real() / (h * h)};
}

double heston_cos_call(const HestonParams& p, const CosSettings& s) {
  check_params(p);
  if (s.n_terms < 16 || !(s.trunc_width >= 6.0)) {
    throw DomainError("COS: need n_terms >= 16 and trunc_width >= 6");
  }
  const auto [c1, c2] = heston_cumulants(p);
  if (!std::isfinite(c1) || !std::isfinite(c2) || c2 <= 0.0) {
    throw DomainError("COS: invalid truncation interval (c1=" + std::to_string(c1) +
                      ", c2=" + std::to_string(c2) + ")");
  }
  const double x = std::log(p.m);
  const double half_width = s.trunc_width * std::sqrt(c2);
  const double a = x + c1 - half_width;
  const double b = x + c1 + half_width;
  const double discount = std::exp(-p.r * p.tau);
  const double forward_intrinsic = p.m - discount;

  // Put payoff (1 - e^y)^+ lives on [a, min(0, b)].
  const double upper = std::min(0.0, b);
  double put = 0.0;
  if (upper > a) {
    const double width = b - a;
    const double e_u = std::exp(upper);
    const double e_a = std::exp(a);
    double sum = 0.0;
    for (std::size_t k = 0; k < s.n_terms; ++k) {
      const double w = static_cast<double>(k) * std::numbers::pi / width;
      // chi_k and psi_k integrals of e^y and 1 against cos(w (y - a)) on [a, upper].
      const double cos_u = std::cos(w * (upper - a));
      const double sin_u = std::sin(w * (upper - a));
      const double chi = (cos_u * e_u - e_a + w * sin_u * e_u) / (1.0 + w * w);
      const double psi = k == 0 ? upper - a : sin_u / w;
      const double coef = 2.0 / width * (psi - chi);
      const cplx phase = std::exp(kI * w * (x - a));
      double term = (heston_char_fn(w, p) * phase).real() * coef;
      if (k == 0) term *= 0.5;
      sum += term;
    }
    put = discount * sum;
  }
  const double call = put + forward_intrinsic;
  if (!std::isfinite(call)) throw DomainError("COS: non-finite price");
  return std::clamp(call, 0.0, p.m);
}

std::size_t default_mc_steps(double tau) {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(250.0 * tau)));
}

McEstimate mc_heston_oracle(const HestonParams& p, std::size_t n_paths, std::size_t n_steps,
                            const RngStream& rng) {
  check_params(p);
  if (n_paths < 2 || n_steps < 1) throw DimensionError("mc_heston_oracle: need paths and steps");
  constexpr std::size_t kPairsPerBlock = 4096;
  const std::size_t pairs = n_paths / 2;
  const std::size_t blocks = (pairs + kPairsPerBlock - 1) / kPairsPerBlock;
  const double dt = p.tau / static_cast<double>(n_steps);
  const double sqrt_dt = std::sqrt(dt);
  const double rho_perp = std::sqrt(std::max(0.0, 1.0 - p.rho * p.rho));
  const double discount = std::exp(-p.r * p.tau);
  const double log_s0 = std::log(p.m);

  std::vector<double> block_sum(blocks, 0.0);
  std::vector<double> block_sumsq(blocks, 0.0);
  parallel_for(blocks, [&](std::size_t blk) {
    RngStream stream = rng.child(blk);
    const std::size_t begin = blk * kPairsPerBlock;
    const std::size_t end = std::min(pairs, begin + kPairsPerBlock);
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t i = begin; i < end; ++i) {
      double ls[2] = {log_s0, log_s0};
      double v[2] = {p.v0, p.v0};
      for (std::size_t step = 0; step < n_steps; ++step) {
        const double z1 = stream.normal();
        const double z2 = stream.normal();
        for (int side = 0; side < 2; ++side) {
          const double sign = side == 0 ? 1.0 : -1.0;
          const double vp = std::max(v[side], 0.0);
          const double vol = std::sqrt(vp) * sqrt_dt;
          const double w1 = sign * z1;
          const double w2 = sign * (p.rho * z1 + rho_perp * z2);
          ls[side] += (p.r - 0.5 * vp) * dt + vol * w1;
          v[side] += p.kappa * (p.vbar - vp) * dt + p.gamma * vol * w2;
        }
      }
      const double pay =
          0.5 * discount * (std::max(std::exp(ls[0]) - 1.0, 0.0) + std::max(std::exp(ls[1]) - 1.0, 0.0));
      sum += pay;
      sumsq += pay * pay;
    }
    block_sum[blk] = sum;
    block_sumsq[blk] = sumsq;
  });

  double sum = 0.0;
  double sumsq = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    sum += block_sum[b];
    sumsq += block_sumsq[b];
  }
  const double n = static_cast<double>(pairs);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq / n - mean * mean) * n / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

}  // namespace optnet::pricing
