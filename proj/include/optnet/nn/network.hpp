#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "optnet/math/matrix.hpp"
#include "optnet/nn/param_set.hpp"
#include "optnet/nn/spec.hpp"

namespace optnet::nn {

/// Forward quantities of one mini-batch, kept for the backward pass.
///
/// states[k] is the (B x width) input of hidden layer k and states[L] the last
/// hidden output. pre/post hold each affine unit of a layer before and after
/// its activation, in parameter order (H; H,T; H,T,C; or Z,G,R,H1..Hn).
struct LayerActivations {
  NetworkSpec spec;
  Mat input;
  std::vector<Mat> states;
  std::vector<std::vector<Mat>> pre;
  std::vector<std::vector<Mat>> post;
  std::vector<Mat> gated_state;  // S * R per DGM layer

  std::size_t batch() const noexcept { return input.rows(); }
};

struct ParamShape {
  std::string name;
  std::size_t rows;
  std::size_t cols;
};

/// Parameter names and shapes of `spec`, in ParamSet order.
///
/// Input projection "in.W", "in.b" (DGM family "in.w", "in.b"), then per hidden
/// layer k = 1..L "l<k>.W_H", "l<k>.b_H" (plus _T and _C for the highway kinds)
/// or "l<k>.{w,u,b}_{z,g,r,h}" for DGM layers, with "_h2", "_h3", ... for the
/// extra deep-DGM sublayers. Output "out.W" (1 x n) and "out.b". The MLP has no
/// separate projection: its first hidden layer maps d to n.
std::vector<ParamShape> param_layout(const NetworkSpec& spec);

class Network {
 public:
  explicit Network(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }

  /// Weights drawn with the spec's initializer, each from its own stream
  /// derive_seed(seed, name); biases zero.
  ParamSet init_params(std::uint64_t seed) const;
  ParamSet zero_params() const;

  /// Throws DimensionError unless `params` has this network's layout.
  void check(const ParamSet& params) const;

  /// Predictions for the rows of X (B x input_dim).
  Vec forward(const ParamSet& params, const Mat& X, LayerActivations* cache = nullptr) const;
  double forward_one(const ParamSet& params, std::span<const double> x) const;

  /// Gradient of sum_i dy[i] * yhat[i] with respect to every parameter, for
  /// the batch recorded in `cache`.
  ParamSet backward(const ParamSet& params, const LayerActivations& cache,
                    std::span<const double> dy) const;
  /// As backward, overwriting `grads` (which must have this layout).
  void backward_into(const ParamSet& params, const LayerActivations& cache,
                     std::span<const double> dy, ParamSet& grads) const;

 private:
  struct Unit {
    std::size_t w;  // x-side weight, or npos
    std::size_t u;  // state-side weight
    std::size_t b;
  };

  void forward_layer(const ParamSet& p, std::size_t k, const Mat& X, const Mat& in, Mat& out,
                     std::vector<Mat>& pre, std::vector<Mat>& post, Mat& gated) const;
  void unit_forward(const ParamSet& p, const Unit& unit, const Mat& X, const Mat& state,
                    Mat& pre) const;
  void unit_backward(const ParamSet& p, const Unit& unit, const Mat& X, const Mat& state,
                     const Mat& dpre, ParamSet& grads, Mat* dstate) const;

  NetworkSpec spec_;
  std::vector<ParamShape> layout_;
  Unit input_{};
  std::vector<std::vector<Unit>> units_;
  std::size_t out_w_ = 0;
  std::size_t out_b_ = 0;
};

struct Model {
  NetworkSpec spec;
  ParamSet params;
};

/// Text format: "# optnet-model v1 ..." header, a "spec ..." line, then per
/// parameter "param <name> <rows> <cols>" followed by `rows` lines of values.
void write_model(const Model& model, std::ostream& out, std::string_view provenance = {});
void write_model(const Model& model, const std::filesystem::path& path,
                 std::string_view provenance = {});
Model read_model(std::istream& in);
Model read_model(const std::filesystem::path& path);

}  // namespace optnet::nn
