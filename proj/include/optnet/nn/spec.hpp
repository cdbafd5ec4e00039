#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "optnet/math/activation.hpp"
#include "optnet/math/init.hpp"

namespace optnet::nn {

enum class LayerKind { Dense, Residual, Highway, GeneralizedHighway, Dgm, DeepDgm, NoRecDgm };

/// File and CLI names: mlp, residual, highway, genhighway, dgm, deepdgm, norecdgm.
std::string_view to_string(LayerKind kind);
LayerKind parse_layer_kind(std::string_view name);

bool is_dgm_family(LayerKind kind);

struct NetworkSpec {
  std::size_t input_dim = 4;
  std::size_t layers = 3;
  std::size_t nodes = 50;
  LayerKind kind = LayerKind::Dense;
  // Sublayers computing H in a deep DGM layer; 1 for every other kind.
  std::size_t n_sub = 1;
  Activation activation = Activation::ReLU;
  Activation gate_activation = Activation::Tanh;
  Initializer initializer = Initializer::HeNormal;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Paper configuration of each kind at the given size: ReLU and He for the
/// MLP, tanh and Glorot for the gated and DGM kinds, tanh gates, and three
/// H sublayers for the deep DGM.
NetworkSpec default_spec(LayerKind kind, std::size_t input_dim, std::size_t layers,
                         std::size_t nodes);

/// Throws UsageError on zero sizes, Softmax activations, or n_sub != 1 outside DeepDgm.
void validate(const NetworkSpec& spec);

/// Single-line "key=value" rendering, and its inverse.
std::string format_spec(const NetworkSpec& spec);
NetworkSpec parse_spec(std::string_view line);

/// Number of scalars in the parameter set of `spec`.
std::size_t count_params(const NetworkSpec& spec);

}  // namespace optnet::nn
