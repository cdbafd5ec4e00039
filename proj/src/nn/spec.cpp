#include "optnet/nn/spec.hpp"

#include <map>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/util/text.hpp"

namespace optnet::nn {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense: return "mlp";
    case LayerKind::Residual: return "residual";
    case LayerKind::Highway: return "highway";
    case LayerKind::GeneralizedHighway: return "genhighway";
    case LayerKind::Dgm: return "dgm";
    case LayerKind::DeepDgm: return "deepdgm";
    case LayerKind::NoRecDgm: return "norecdgm";
  }
  return "?";
}

LayerKind parse_layer_kind(std::string_view name) {
  for (auto k : {LayerKind::Dense, LayerKind::Residual, LayerKind::Highway,
                 LayerKind::GeneralizedHighway, LayerKind::Dgm, LayerKind::DeepDgm,
                 LayerKind::NoRecDgm}) {
    if (name == to_string(k)) return k;
  }
  if (name == "dense") return LayerKind::Dense;
  throw UsageError("unknown layer kind '" + std::string(name) +
                   "' (mlp, residual, highway, genhighway, dgm, deepdgm, norecdgm)");
}

bool is_dgm_family(LayerKind kind) {
  return kind == LayerKind::Dgm || kind == LayerKind::DeepDgm || kind == LayerKind::NoRecDgm;
}

NetworkSpec default_spec(LayerKind kind, std::size_t input_dim, std::size_t layers,
                         std::size_t nodes) {
  NetworkSpec s;
  s.input_dim = input_dim;
  s.layers = layers;
  s.nodes = nodes;
  s.kind = kind;
  if (kind == LayerKind::Dense) {
    s.activation = Activation::ReLU;
    s.initializer = Initializer::HeNormal;
  } else {
    s.activation = Activation::Tanh;
    s.initializer = Initializer::GlorotNormal;
  }
  s.gate_activation = Activation::Tanh;
  s.n_sub = kind == LayerKind::DeepDgm ? 3 : 1;
  return s;
}

void validate(const NetworkSpec& s) {
  if (s.input_dim == 0 || s.layers == 0 || s.nodes == 0) {
    throw UsageError("network spec: input_dim, layers and nodes must be >= 1");
  }
  if (s.activation == Activation::Softmax || s.gate_activation == Activation::Softmax) {
    throw UsageError("network spec: softmax is not available as a hidden activation");
  }
  if (s.n_sub == 0) throw UsageError("network spec: n_sub must be >= 1");
  if (s.kind != LayerKind::DeepDgm && s.n_sub != 1) {
    throw UsageError("network spec: n_sub applies to deepdgm only");
  }
}

std::string format_spec(const NetworkSpec& s) {
  std::string out = "kind=" + std::string(to_string(s.kind));
  out += " input_dim=" + std::to_string(s.input_dim);
  out += " layers=" + std::to_string(s.layers);
  out += " nodes=" + std::to_string(s.nodes);
  out += " n_sub=" + std::to_string(s.n_sub);
  out += " activation=" + std::string(to_string(s.activation));
  out += " gate_activation=" + std::string(to_string(s.gate_activation));
  out += " initializer=" + std::string(to_string(s.initializer));
  return out;
}

NetworkSpec parse_spec(std::string_view line) {
  NetworkSpec s;
  try {
    s.kind = parse_layer_kind(text::header_value(line, "kind"));
    s.input_dim = text::parse_u64(text::header_value(line, "input_dim"));
    s.layers = text::parse_u64(text::header_value(line, "layers"));
    s.nodes = text::parse_u64(text::header_value(line, "nodes"));
    s.n_sub = text::parse_u64(text::header_value(line, "n_sub"));
    s.activation = parse_activation(text::header_value(line, "activation"));
    s.gate_activation = parse_activation(text::header_value(line, "gate_activation"));
    s.initializer = parse_initializer(text::header_value(line, "initializer"));
  } catch (const UsageError& e) {
    throw FormatError(std::string("network spec: ") + e.what());
  }
  validate(s);
  return s;
}

std::size_t count_params(const NetworkSpec& s) {
  validate(s);
  const std::size_t d = s.input_dim;
  const std::size_t n = s.nodes;
  const std::size_t L = s.layers;
  const std::size_t square = n * n + n;
  const std::size_t input = (d + 1) * n;
  const std::size_t output = n + 1;
  switch (s.kind) {
    case LayerKind::Dense: return input + (L - 1) * square + output;
    case LayerKind::Residual: return input + L * square + output;
    case LayerKind::Highway: return input + L * 2 * square + output;
    case LayerKind::GeneralizedHighway: return input + L * 3 * square + output;
    case LayerKind::Dgm:
    case LayerKind::DeepDgm: return input + L * (3 + s.n_sub) * (d * n + square) + output;
    case LayerKind::NoRecDgm: return input + L * 4 * square + output;
  }
  return 0;
}

}  // namespace optnet::nn
