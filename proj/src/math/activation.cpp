#include "optnet/math/activation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/math/normal.hpp"

namespace optnet {

std::string_view to_string(Activation kind) {
  switch (kind) {
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Tanh: return "tanh";
    case Activation::ReLU: return "relu";
    case Activation::GELU: return "gelu";
    case Activation::Softmax: return "softmax";
    case Activation::Identity: return "identity";
  }
  return "?";
}

Activation parse_activation(std::string_view name) {
  for (auto k : {Activation::Sigmoid, Activation::Tanh, Activation::ReLU, Activation::GELU,
                 Activation::Softmax, Activation::Identity}) {
    if (to_string(k) == name) return k;
  }
  throw UsageError("unknown activation '" + std::string(name) + "'");
}

double activate(Activation kind, double x) {
  switch (kind) {
    case Activation::Sigmoid:
      // Split by sign so exp never overflows.
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      else {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
    case Activation::Tanh: return std::tanh(x);
    case Activation::ReLU: return x > 0.0 ? x : 0.0;
    case Activation::GELU: return x * std_normal_cdf(x);
    case Activation::Identity: return x;
    case Activation::Softmax: break;
  }
  throw UnsupportedError("softmax is not an elementwise activation");
}

double activate_derivative(Activation kind, double x) {
  switch (kind) {
    case Activation::Sigmoid: {
      const double s = activate(Activation::Sigmoid, x);
      return s * (1.0 - s);
    }
    case Activation::Tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Activation::ReLU: return x > 0.0 ? 1.0 : 0.0;
    case Activation::GELU: return std_normal_cdf(x) + x * std_normal_pdf(x);
    case Activation::Identity: return 1.0;
    case Activation::Softmax: break;
  }
  throw UnsupportedError("softmax derivative is not provided");
}

void activate_inplace(Activation kind, std::span<double> x) {
  switch (kind) {
    case Activation::Identity: return;
    case Activation::Tanh:
      for (double& v : x) v = std::tanh(v);
      return;
    case Activation::ReLU:
      for (double& v : x) v = v > 0.0 ? v : 0.0;
      return;
    default:
      for (double& v : x) v = activate(kind, v);
  }
}

namespace {

void require_finite(std::span<const double> x, const char* op) {
  if (!all_finite(x)) throw DomainError(std::string(op) + ": non-finite input");
}

}  // namespace

Vec apply_activation(Activation kind, std::span<const double> x) {
  require_finite(x, "apply_activation");
  if (kind == Activation::Softmax) {
    if (x.empty()) throw DimensionError("softmax of an empty vector");
    const double hi = *std::max_element(x.begin(), x.end());
    Vec y(x.size());
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      y[i] = std::exp(x[i] - hi);
      total += y[i];
    }
    for (double& v : y) v /= total;
    return y;
  }
  Vec y(x.begin(), x.end());
  for (double& v : y) v = activate(kind, v);
  return y;
}

Vec activation_derivative(Activation kind, std::span<const double> x) {
  if (kind == Activation::Softmax) throw UnsupportedError("softmax derivative is not provided");
  require_finite(x, "activation_derivative");
  Vec y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = activate_derivative(kind, x[i]);
  return y;
}

}  // namespace optnet
