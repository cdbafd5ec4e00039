#include "optnet/nn/layers.hpp"

#include <string>

#include "optnet/math/errors.hpp"

namespace optnet::nn {

namespace {

void require_square(const Mat& W, std::size_t x_len, const char* op) {
  if (W.rows() != W.cols() || W.cols() != x_len) {
    throw DimensionError(std::string(op) + ": layer must map width " + std::to_string(x_len) +
                         " to itself, W is " + std::to_string(W.rows()) + "x" +
                         std::to_string(W.cols()));
  }
}

void require_same(std::size_t a, std::size_t b, const char* op) {
  if (a != b) throw DimensionError(std::string(op) + ": vector lengths differ");
}

Vec gate_value(const DgmGate& gate, CSpan x, CSpan s, Activation act) {
  Vec out = affine(gate.u, s, gate.b);
  if (!gate.w.empty()) {
    const Vec wx = affine(gate.w, x, Vec(gate.w.rows(), 0.0));
    require_same(wx.size(), out.size(), "dgm gate");
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += wx[i];
  }
  activate_inplace(act, out);
  return out;
}

Vec dgm_common(CSpan x, CSpan s, const DgmLayerParams& p, Activation act) {
  if (p.h.empty()) throw DimensionError("dgm layer: at least one H transform is required");
  const Vec z = gate_value(p.z, x, s, act);
  const Vec g = gate_value(p.g, x, s, act);
  const Vec r = gate_value(p.r, x, s, act);
  require_same(z.size(), s.size(), "dgm layer");
  Vec sr(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) sr[i] = s[i] * r[i];
  Vec h = gate_value(p.h[0], x, sr, act);
  for (std::size_t j = 1; j < p.h.size(); ++j) h = gate_value(p.h[j], x, h, act);
  require_same(h.size(), s.size(), "dgm layer");
  Vec out(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out[i] = (1.0 - g[i]) * h[i] + z[i] * s[i];
  return out;
}

}  // namespace

Vec dense_forward(CSpan x, const Mat& W_H, CSpan b_H, Activation act) {
  Vec y = affine(W_H, x, b_H);
  activate_inplace(act, y);
  return y;
}

Vec residual_forward(CSpan x, const Mat& W_H, CSpan b_H, Activation act) {
  require_square(W_H, x.size(), "residual");
  Vec y = dense_forward(x, W_H, b_H, act);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += x[i];
  return y;
}

Vec highway_combine(CSpan h, CSpan t, CSpan x) {
  require_same(h.size(), t.size(), "highway");
  require_same(h.size(), x.size(), "highway");
  Vec y(h.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = h[i] * t[i] + x[i] * (1.0 - t[i]);
  return y;
}

Vec generalized_highway_combine(CSpan h, CSpan t, CSpan c, CSpan x) {
  require_same(h.size(), t.size(), "generalized highway");
  require_same(h.size(), c.size(), "generalized highway");
  require_same(h.size(), x.size(), "generalized highway");
  Vec y(h.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = h[i] * t[i] + x[i] * c[i];
  return y;
}

Vec highway_forward(CSpan x, const Mat& W_H, CSpan b_H, const Mat& W_T, CSpan b_T,
                    Activation act, Activation gate_act) {
  require_square(W_H, x.size(), "highway");
  require_square(W_T, x.size(), "highway");
  return highway_combine(dense_forward(x, W_H, b_H, act), dense_forward(x, W_T, b_T, gate_act),
                         x);
}

Vec generalized_highway_forward(CSpan x, const Mat& W_H, CSpan b_H, const Mat& W_T, CSpan b_T,
                                const Mat& W_C, CSpan b_C, Activation act,
                                Activation gate_act) {
  require_square(W_H, x.size(), "generalized highway");
  require_square(W_T, x.size(), "generalized highway");
  require_square(W_C, x.size(), "generalized highway");
  return generalized_highway_combine(dense_forward(x, W_H, b_H, act),
                                     dense_forward(x, W_T, b_T, gate_act),
                                     dense_forward(x, W_C, b_C, gate_act), x);
}

Vec dgm_layer_forward(CSpan x, CSpan s, const DgmLayerParams& p, Activation act) {
  if (p.h.size() != 1) throw DimensionError("dgm layer: expects exactly one H transform");
  return dgm_common(x, s, p, act);
}

Vec deep_dgm_layer_forward(CSpan x, CSpan s, const DgmLayerParams& p, Activation act) {
  return dgm_common(x, s, p, act);
}

Vec norec_dgm_layer_forward(CSpan s, const DgmLayerParams& p, Activation act) {
  for (const DgmGate* g : {&p.z, &p.g, &p.r}) {
    if (!g->w.empty()) throw DimensionError("norec dgm layer: gates take no x weights");
  }
  for (const auto& g : p.h) {
    if (!g.w.empty()) throw DimensionError("norec dgm layer: gates take no x weights");
  }
  if (p.h.size() != 1) throw DimensionError("norec dgm layer: expects exactly one H transform");
  return dgm_common({}, s, p, act);
}

}  // namespace optnet::nn
