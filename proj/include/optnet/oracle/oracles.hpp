#pragma once
// Independent reference implementations and the validation checks built on them.
// Nothing here is used to produce labels.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "optnet/nn/spec.hpp"

namespace optnet::oracle {

/// erf by its everywhere-positive series 2/sqrt(pi) e^{-x^2} sum 2^n x^{2n+1} / (2n+1)!!.
long double erf_series(long double x);
/// erfc for x > 0 by the Laplace continued fraction (modified Lentz).
long double erfc_continued_fraction(long double x);
/// Normal CDF from the two functions above, switching at |x| / sqrt 2 = 3.
long double normal_cdf(long double x);

/// m Phi(d1) - e^{-r tau} Phi(d2) evaluated in long double with normal_cdf.
long double bs_call_reference(long double m, long double tau, long double r, long double sigma);

struct GradientCheck {
  nn::LayerKind kind;
  std::size_t draws = 0;
  std::size_t entries = 0;  // gradient entries compared, over all draws
  double max_rel_error = 0.0;
};

/// Backpropagated gradients of a random (d=4, n=5, L=2) network against the
/// fourth-order central difference (8(f(h)-f(-h)) - (f(2h)-f(-2h))) / 12h,
/// h = 1e-4 max(1, |theta|). Relative error |fd-g| / max(|fd|, |g|, 1e-8).
GradientCheck gradient_check(nn::LayerKind kind, std::uint64_t seed, std::size_t draws = 5);

struct CheckLine {
  std::string name;
  bool pass;
  std::string detail;
};

struct OracleReport {
  std::string check;
  std::vector<CheckLine> lines;
  bool pass() const;
};

struct OracleOptions {
  std::uint64_t seed = 1;
  std::size_t grid_points = 10'000;  // bs and iv sweeps
  std::size_t mc_points = 5;
  std::size_t mc_paths = 1'000'000;
};

OracleReport check_bs(const OracleOptions& o = {});
OracleReport check_iv(const OracleOptions& o = {});
OracleReport check_heston(const OracleOptions& o = {});
OracleReport check_grad(const OracleOptions& o = {});
OracleReport check_params();

/// bs, heston, iv, grad, params.
std::vector<std::string> check_names();
/// Throws UsageError for an unknown name.
OracleReport run_check(std::string_view name, const OracleOptions& o = {});

/// One "PASS|FAIL <name>: <detail>" line per entry, then a summary line.
void print_report(const OracleReport& report, std::ostream& out);

}  // namespace optnet::oracle
