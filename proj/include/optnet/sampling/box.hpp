#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace optnet::sampling {

enum class ProblemKind { BsPrice, HestonPrice, ImpliedVol, TransformedImpliedVol };

/// Short names used in files and on the command line: bs, heston, iv, tiv.
std::string_view to_string(ProblemKind kind);
ProblemKind parse_problem(std::string_view name);

/// Number of network inputs for the problem (4, 8, 4, 4).
std::size_t input_dim(ProblemKind kind);

struct Dimension {
  std::string name;
  double lo;
  double hi;
};

/// Axis-aligned parameter box; lo < hi in every dimension.
class Box {
 public:
  explicit Box(std::vector<Dimension> dims);

  std::size_t dim() const noexcept { return dims_.size(); }
  const Dimension& operator[](std::size_t i) const { return dims_[i]; }
  const std::vector<Dimension>& dims() const noexcept { return dims_; }
  std::vector<std::string> names() const;
  bool contains(const double* row) const;

 private:
  std::vector<Dimension> dims_;
};

/// Black-Scholes generation box: m, tau, r, sigma.
Box black_scholes_box();
/// Heston generation box: m, tau, r, rho, kappa, vbar, gamma, v0.
Box heston_box();

/// Box of the network inputs of `kind`. For the implied-volatility problems the
/// fourth column is derived from prices, and its bounds are the analytic ones:
/// price in [0, max m] and log time value in [log(1e-8), 0].
Box input_box(ProblemKind kind);

/// Box the LHS draw is taken from (the Black-Scholes box for the two
/// implied-volatility problems).
Box generation_box(ProblemKind kind);

}  // namespace optnet::sampling
