#include "optnet/sampling/box.hpp"

#include <cmath>

#include "optnet/math/errors.hpp"
#include "optnet/pricing/black_scholes.hpp"

namespace optnet::sampling {

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::BsPrice: return "bs";
    case ProblemKind::HestonPrice: return "heston";
    case ProblemKind::ImpliedVol: return "iv";
    case ProblemKind::TransformedImpliedVol: return "tiv";
  }
  return "?";
}

ProblemKind parse_problem(std::string_view name) {
  if (name == "bs" || name == "bs_price") return ProblemKind::BsPrice;
  if (name == "heston" || name == "heston_price") return ProblemKind::HestonPrice;
  if (name == "iv" || name == "implied_vol") return ProblemKind::ImpliedVol;
  if (name == "tiv" || name == "transformed_implied_vol") {
    return ProblemKind::TransformedImpliedVol;
  }
  throw UsageError("unknown problem '" + std::string(name) + "' (bs, heston, iv, tiv)");
}

std::size_t input_dim(ProblemKind kind) { return kind == ProblemKind::HestonPrice ? 8 : 4; }

Box::Box(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  for (const auto& d : dims_) {
    if (!(d.lo < d.hi)) throw DimensionError("Box: empty range for '" + d.name + "'");
  }
}

std::vector<std::string> Box::names() const {
  std::vector<std::string> out;
  out.reserve(dims_.size());
  for (const auto& d : dims_) out.push_back(d.name);
  return out;
}

bool Box::contains(const double* row) const {
  for (std::size_t j = 0; j < dims_.size(); ++j) {
    if (!(row[j] >= dims_[j].lo && row[j] <= dims_[j].hi)) return false;
  }
  return true;
}

Box black_scholes_box() {
  return Box({{"m", 0.4, 1.6}, {"tau", 0.2, 1.1}, {"r", 0.02, 0.1}, {"sigma", 0.01, 1.0}});
}

Box heston_box() {
  return Box({{"m", 0.4, 1.6},
              {"tau", 0.2, 1.1},
              {"r", 0.02, 0.1},
              {"rho", -0.95, 0.0},
              {"kappa", 0.0, 2.0},
              {"vbar", 0.0, 0.5},
              {"gamma", 0.0, 0.5},
              {"v0", 0.05, 0.5}});
}

Box input_box(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::BsPrice: return black_scholes_box();
    case ProblemKind::HestonPrice: return heston_box();
    case ProblemKind::ImpliedVol:
      return Box({{"m", 0.4, 1.6}, {"tau", 0.2, 1.1}, {"r", 0.02, 0.1}, {"price", 0.0, 1.6}});
    case ProblemKind::TransformedImpliedVol:
      return Box({{"m", 0.4, 1.6},
                  {"tau", 0.2, 1.1},
                  {"r", 0.02, 0.1},
                  {"log_time_value", std::log(pricing::kTimeValueFloor), 0.0}});
  }
  throw UsageError("input_box: unknown problem");
}

Box generation_box(ProblemKind kind) {
  return kind == ProblemKind::HestonPrice ? heston_box() : black_scholes_box();
}

}  // namespace optnet::sampling
