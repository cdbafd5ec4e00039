#pragma once

// Single-vector layer maps. The batched network in network.hpp computes the
// same quantities row by row; these are the readable reference forms.

#include <span>
#include <vector>

#include "optnet/math/activation.hpp"
#include "optnet/math/matrix.hpp"

namespace optnet::nn {

using CSpan = std::span<const double>;

/// act(W x + b)
Vec dense_forward(CSpan x, const Mat& W_H, CSpan b_H, Activation act);

/// act(W x + b) + x; W must be square.
Vec residual_forward(CSpan x, const Mat& W_H, CSpan b_H, Activation act);

/// H * T + x * (1 - T)
Vec highway_combine(CSpan h, CSpan t, CSpan x);
/// H * T + x * C
Vec generalized_highway_combine(CSpan h, CSpan t, CSpan c, CSpan x);

Vec highway_forward(CSpan x, const Mat& W_H, CSpan b_H, const Mat& W_T, CSpan b_T,
                    Activation act, Activation gate_act);

Vec generalized_highway_forward(CSpan x, const Mat& W_H, CSpan b_H, const Mat& W_T, CSpan b_T,
                                const Mat& W_C, CSpan b_C, Activation act,
                                Activation gate_act);

/// act(w x + u s + b). An empty w drops the x term.
struct DgmGate {
  Mat w;
  Mat u;
  Vec b;
};

/// Gates of one DGM layer. `h` holds the chain computing H: h[0] sees S * R,
/// h[j] sees the output of h[j-1]. A plain DGM layer has exactly one.
struct DgmLayerParams {
  DgmGate z;
  DgmGate g;
  DgmGate r;
  std::vector<DgmGate> h;
};

/// S_new = (1 - G) * H + Z * S with a single H transform.
Vec dgm_layer_forward(CSpan x, CSpan s, const DgmLayerParams& p, Activation act);

/// As dgm_layer_forward with H computed by the whole chain p.h (at least one).
Vec deep_dgm_layer_forward(CSpan x, CSpan s, const DgmLayerParams& p, Activation act);

/// DGM layer without x terms; every w must be empty.
Vec norec_dgm_layer_forward(CSpan s, const DgmLayerParams& p, Activation act);

}  // namespace optnet::nn
