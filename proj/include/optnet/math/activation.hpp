#pragma once

#include <span>
#include <string_view>

#include "optnet/math/matrix.hpp"

namespace optnet {

enum class Activation { Sigmoid, Tanh, ReLU, GELU, Softmax, Identity };

std::string_view to_string(Activation kind);
/// Accepts the lower-case names produced by to_string ("relu", "tanh", ...).
Activation parse_activation(std::string_view name);

/// Elementwise image of x, or the softmax of the whole vector.
Vec apply_activation(Activation kind, std::span<const double> x);

/// Elementwise derivative. ReLU'(0) is 0. Softmax is rejected.
Vec activation_derivative(Activation kind, std::span<const double> x);

// Scalar forms used by the layer code. Softmax is not elementwise and throws.
double activate(Activation kind, double x);
double activate_derivative(Activation kind, double x);

/// In-place elementwise activation of a contiguous block.
void activate_inplace(Activation kind, std::span<double> x);

}  // namespace optnet
