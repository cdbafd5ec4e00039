#include "optnet/nn/network.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <string>
#include <unordered_map>

#include "optnet/math/errors.hpp"
#include "optnet/math/init.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/simd/kernels.hpp"
#include "optnet/util/text.hpp"

namespace optnet::nn {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::size_t highway_units(LayerKind kind) {
  switch (kind) {
    case LayerKind::Dense:
    case LayerKind::Residual: return 1;
    case LayerKind::Highway: return 2;
    case LayerKind::GeneralizedHighway: return 3;
    default: return 0;
  }
}

std::string layer_prefix(std::size_t k) { return "l" + std::to_string(k + 1) + "."; }

// Gate suffixes of a DGM layer: z, g, r, h, h2, h3, ...
std::vector<std::string> dgm_gates(std::size_t n_sub) {
  std::vector<std::string> g = {"z", "g", "r", "h"};
  for (std::size_t j = 2; j <= n_sub; ++j) g.push_back("h" + std::to_string(j));
  return g;
}

void set_bias_rows(Mat& out, const Mat& b) {
  for (std::size_t i = 0; i < out.rows(); ++i) std::copy_n(b.data(), b.rows(), out.row(i).data());
}

void add_column_sums(const Mat& d, Mat& b) {
  b.fill(0.0);
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double* row = d.row(i).data();
    for (std::size_t j = 0; j < d.cols(); ++j) b.data()[j] += row[j];
  }
}

Mat activated(Activation kind, const Mat& pre) {
  Mat post = pre;
  activate_inplace(kind, post.values());
  return post;
}

// dA * act'(pre), using the cached post-activation where that is cheaper.
Mat through_activation(Activation kind, const Mat& pre, const Mat& post, Mat da) {
  double* g = da.data();
  const double* z = pre.data();
  const double* a = post.data();
  const std::size_t n = da.size();
  switch (kind) {
    case Activation::Tanh:
      for (std::size_t i = 0; i < n; ++i) g[i] *= 1.0 - a[i] * a[i];
      break;
    case Activation::Sigmoid:
      for (std::size_t i = 0; i < n; ++i) g[i] *= a[i] * (1.0 - a[i]);
      break;
    case Activation::Identity: break;
    case Activation::ReLU:
      for (std::size_t i = 0; i < n; ++i) g[i] = z[i] > 0.0 ? g[i] : 0.0;
      break;
    default:
      for (std::size_t i = 0; i < n; ++i) g[i] *= activate_derivative(kind, z[i]);
  }
  return da;
}

}  // namespace

std::vector<ParamShape> param_layout(const NetworkSpec& s) {
  validate(s);
  const std::size_t d = s.input_dim;
  const std::size_t n = s.nodes;
  std::vector<ParamShape> out;
  auto add = [&](std::string name, std::size_t r, std::size_t c) {
    out.push_back({std::move(name), r, c});
  };

  if (s.kind == LayerKind::Dense) {
    for (std::size_t k = 0; k < s.layers; ++k) {
      add(layer_prefix(k) + "W_H", n, k == 0 ? d : n);
      add(layer_prefix(k) + "b_H", n, 1);
    }
  } else if (!is_dgm_family(s.kind)) {
    add("in.W", n, d);
    add("in.b", n, 1);
    static const char* suffix[] = {"H", "T", "C"};
    for (std::size_t k = 0; k < s.layers; ++k) {
      for (std::size_t u = 0; u < highway_units(s.kind); ++u) {
        add(layer_prefix(k) + "W_" + suffix[u], n, n);
        add(layer_prefix(k) + "b_" + suffix[u], n, 1);
      }
    }
  } else {
    add("in.w", n, d);
    add("in.b", n, 1);
    for (std::size_t k = 0; k < s.layers; ++k) {
      for (const auto& g : dgm_gates(s.n_sub)) {
        if (s.kind != LayerKind::NoRecDgm) add(layer_prefix(k) + "w_" + g, n, d);
        add(layer_prefix(k) + "u_" + g, n, n);
        add(layer_prefix(k) + "b_" + g, n, 1);
      }
    }
  }
  add("out.W", 1, n);
  add("out.b", 1, 1);
  return out;
}

Network::Network(NetworkSpec spec) : spec_(spec), layout_(param_layout(spec)) {
  std::unordered_map<std::string, std::size_t> at;
  for (std::size_t i = 0; i < layout_.size(); ++i) at.emplace(layout_[i].name, i);
  auto find = [&](const std::string& name) {
    const auto it = at.find(name);
    return it == at.end() ? npos : it->second;
  };

  if (spec_.kind == LayerKind::Dense) {
    input_ = {npos, npos, npos};
  } else if (!is_dgm_family(spec_.kind)) {
    input_ = {npos, find("in.W"), find("in.b")};
  } else {
    input_ = {npos, find("in.w"), find("in.b")};
  }

  units_.resize(spec_.layers);
  static const char* suffix[] = {"H", "T", "C"};
  for (std::size_t k = 0; k < spec_.layers; ++k) {
    const std::string p = layer_prefix(k);
    if (!is_dgm_family(spec_.kind)) {
      for (std::size_t u = 0; u < highway_units(spec_.kind); ++u) {
        units_[k].push_back({npos, find(p + "W_" + suffix[u]), find(p + "b_" + suffix[u])});
      }
    } else {
      for (const auto& g : dgm_gates(spec_.n_sub)) {
        units_[k].push_back({find(p + "w_" + g), find(p + "u_" + g), find(p + "b_" + g)});
      }
    }
  }
  out_w_ = find("out.W");
  out_b_ = find("out.b");
}

ParamSet Network::zero_params() const {
  ParamSet p;
  for (const auto& s : layout_) p.add(s.name, Mat(s.rows, s.cols));
  return p;
}

ParamSet Network::init_params(std::uint64_t seed) const {
  ParamSet p;
  for (const auto& s : layout_) {
    if (s.name.find(".b") != std::string::npos) {
      p.add(s.name, Mat(s.rows, 1));
    } else {
      RngStream rng(derive_seed(seed, s.name));
      p.add(s.name, init_weights(spec_.initializer, s.cols, s.rows, rng));
    }
  }
  return p;
}

void Network::check(const ParamSet& params) const {
  if (params.size() != layout_.size()) {
    throw DimensionError("network: parameter set has " + std::to_string(params.size()) +
                         " entries, spec needs " + std::to_string(layout_.size()));
  }
  for (std::size_t i = 0; i < layout_.size(); ++i) {
    const auto& s = layout_[i];
    const Mat& m = params.at(i);
    if (params.name(i) != s.name || m.rows() != s.rows || m.cols() != s.cols) {
      throw DimensionError("network: parameter " + std::to_string(i) + " is '" +
                           params.name(i) + "' " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", spec needs '" + s.name + "' " +
                           std::to_string(s.rows) + "x" + std::to_string(s.cols));
    }
  }
}

void Network::unit_forward(const ParamSet& p, const Unit& unit, const Mat& X, const Mat& state,
                           Mat& pre) const {
  const auto& k = simd::kernels();
  const Mat& U = p.at(unit.u);
  const std::size_t B = state.rows();
  pre = Mat(B, U.rows());
  set_bias_rows(pre, p.at(unit.b));
  k.gemm_nt(B, U.rows(), U.cols(), state.data(), U.data(), pre.data(), true);
  if (unit.w != npos) {
    const Mat& W = p.at(unit.w);
    k.gemm_nt(B, W.rows(), W.cols(), X.data(), W.data(), pre.data(), true);
  }
}

void Network::forward_layer(const ParamSet& p, std::size_t k, const Mat& X, const Mat& in,
                            Mat& out, std::vector<Mat>& pre, std::vector<Mat>& post,
                            Mat& gated) const {
  const auto& units = units_[k];
  const Activation act = spec_.activation;
  const Activation gact = spec_.gate_activation;
  pre.assign(units.size(), Mat());
  post.assign(units.size(), Mat());

  if (!is_dgm_family(spec_.kind)) {
    for (std::size_t u = 0; u < units.size(); ++u) {
      unit_forward(p, units[u], X, in, pre[u]);
      post[u] = activated(u == 0 ? act : gact, pre[u]);
    }
    out = post[0];
    const std::size_t n = out.size();
    double* y = out.data();
    const double* x = in.data();
    switch (spec_.kind) {
      case LayerKind::Residual:
        for (std::size_t i = 0; i < n; ++i) y[i] += x[i];
        break;
      case LayerKind::Highway: {
        const double* t = post[1].data();
        for (std::size_t i = 0; i < n; ++i) y[i] = y[i] * t[i] + x[i] * (1.0 - t[i]);
        break;
      }
      case LayerKind::GeneralizedHighway: {
        const double* t = post[1].data();
        const double* c = post[2].data();
        for (std::size_t i = 0; i < n; ++i) y[i] = y[i] * t[i] + x[i] * c[i];
        break;
      }
      default: break;
    }
    return;
  }

  for (std::size_t u = 0; u < 3; ++u) {
    unit_forward(p, units[u], X, in, pre[u]);
    post[u] = activated(act, pre[u]);
  }
  gated = in;
  {
    double* sr = gated.data();
    const double* r = post[2].data();
    for (std::size_t i = 0; i < gated.size(); ++i) sr[i] *= r[i];
  }
  for (std::size_t u = 3; u < units.size(); ++u) {
    unit_forward(p, units[u], X, u == 3 ? gated : post[u - 1], pre[u]);
    post[u] = activated(act, pre[u]);
  }
  out = Mat(in.rows(), in.cols());
  const double* z = post[0].data();
  const double* g = post[1].data();
  const double* h = post.back().data();
  const double* s = in.data();
  double* y = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) y[i] = (1.0 - g[i]) * h[i] + z[i] * s[i];
}

Vec Network::forward(const ParamSet& params, const Mat& X, LayerActivations* cache) const {
  check(params);
  if (X.cols() != spec_.input_dim) {
    throw DimensionError("network: input has " + std::to_string(X.cols()) +
                         " columns, spec needs " + std::to_string(spec_.input_dim));
  }
  LayerActivations local;
  LayerActivations& c = cache ? *cache : local;
  const std::size_t L = spec_.layers;
  c.spec = spec_;
  c.input = X;
  c.states.assign(L + 1, Mat());
  c.pre.assign(L, {});
  c.post.assign(L, {});
  c.gated_state.assign(L, Mat());

  if (spec_.kind == LayerKind::Dense) {
    c.states[0] = X;
  } else {
    unit_forward(params, input_, X, X, c.states[0]);
  }
  for (std::size_t k = 0; k < L; ++k) {
    forward_layer(params, k, c.input, c.states[k], c.states[k + 1], c.pre[k], c.post[k],
                  c.gated_state[k]);
  }

  const Mat& H = c.states[L];
  const std::size_t B = X.rows();
  Vec y(B, params.at(out_b_)(0, 0));
  simd::kernels().gemm_nt(B, 1, spec_.nodes, H.data(), params.at(out_w_).data(), y.data(),
                          true);
  return y;
}

double Network::forward_one(const ParamSet& params, std::span<const double> x) const {
  return forward(params, Mat(1, x.size(), Vec(x.begin(), x.end())))[0];
}

void Network::unit_backward(const ParamSet& p, const Unit& unit, const Mat& X, const Mat& state,
                            const Mat& dpre, ParamSet& grads, Mat* dstate) const {
  const auto& k = simd::kernels();
  const std::size_t B = dpre.rows();
  const std::size_t n_out = dpre.cols();
  Mat& dU = grads.at(unit.u);
  k.gemm_tn(n_out, dU.cols(), B, dpre.data(), state.data(), dU.data(), false);
  if (unit.w != npos) {
    Mat& dW = grads.at(unit.w);
    k.gemm_tn(n_out, dW.cols(), B, dpre.data(), X.data(), dW.data(), false);
  }
  add_column_sums(dpre, grads.at(unit.b));
  if (dstate) {
    const Mat& U = p.at(unit.u);
    k.gemm_nn(B, U.cols(), n_out, dpre.data(), U.data(), dstate->data(), true);
  }
}

ParamSet Network::backward(const ParamSet& params, const LayerActivations& cache,
                           std::span<const double> dy) const {
  ParamSet grads = zero_params();
  backward_into(params, cache, dy, grads);
  return grads;
}

void Network::backward_into(const ParamSet& params, const LayerActivations& c,
                            std::span<const double> dy, ParamSet& grads) const {
  check(params);
  check(grads);
  const std::size_t L = spec_.layers;
  if (!(c.spec == spec_) || c.states.size() != L + 1 || c.pre.size() != L) {
    throw DimensionError("network backward: cache does not come from this network");
  }
  const std::size_t B = c.batch();
  if (dy.size() != B) {
    throw DimensionError("network backward: " + std::to_string(dy.size()) +
                         " upstream gradients for a batch of " + std::to_string(B));
  }
  const auto& kern = simd::kernels();
  const std::size_t n = spec_.nodes;
  const Mat& X = c.input;
  const Activation act = spec_.activation;
  const Activation gact = spec_.gate_activation;

  kern.gemm_tn(1, n, B, dy.data(), c.states[L].data(), grads.at(out_w_).data(), false);
  double db = 0.0;
  for (double v : dy) db += v;
  grads.at(out_b_)(0, 0) = db;

  Mat dY(B, n);
  kern.gemm_nn(B, n, 1, dy.data(), params.at(out_w_).data(), dY.data(), false);

  for (std::size_t k = L; k-- > 0;) {
    const auto& units = units_[k];
    const Mat& in = c.states[k];
    const auto& pre = c.pre[k];
    const auto& post = c.post[k];
    const bool need_input = !(spec_.kind == LayerKind::Dense && k == 0);
    Mat dIn(in.rows(), in.cols());
    Mat* dIn_ptr = need_input ? &dIn : nullptr;
    const std::size_t m = dY.size();
    const double* dy_ = dY.data();
    const double* x = in.data();
    double* di = dIn.data();

    switch (spec_.kind) {
      case LayerKind::Dense:
      case LayerKind::Residual: {
        if (spec_.kind == LayerKind::Residual) dIn = dY;
        unit_backward(params, units[0], X, in, through_activation(act, pre[0], post[0], dY),
                      grads, dIn_ptr);
        break;
      }
      case LayerKind::Highway:
      case LayerKind::GeneralizedHighway: {
        const bool general = spec_.kind == LayerKind::GeneralizedHighway;
        const double* h = post[0].data();
        const double* t = post[1].data();
        Mat dH(B, n), dT(B, n), dC;
        if (general) dC = Mat(B, n);
        for (std::size_t i = 0; i < m; ++i) {
          dH.data()[i] = dy_[i] * t[i];
          if (general) {
            dT.data()[i] = dy_[i] * h[i];
            dC.data()[i] = dy_[i] * x[i];
            di[i] = dy_[i] * post[2].data()[i];
          } else {
            dT.data()[i] = dy_[i] * (h[i] - x[i]);
            di[i] = dy_[i] * (1.0 - t[i]);
          }
        }
        unit_backward(params, units[0], X, in, through_activation(act, pre[0], post[0], dH),
                      grads, dIn_ptr);
        unit_backward(params, units[1], X, in,
                      through_activation(gact, pre[1], post[1], dT), grads, dIn_ptr);
        if (general) {
          unit_backward(params, units[2], X, in,
                        through_activation(gact, pre[2], post[2], dC), grads, dIn_ptr);
        }
        break;
      }
      default: {
        const double* z = post[0].data();
        const double* g = post[1].data();
        const double* r = post[2].data();
        const double* h = post.back().data();
        Mat dZ(B, n), dG(B, n), dR(B, n), dA(B, n);
        for (std::size_t i = 0; i < m; ++i) {
          dZ.data()[i] = dy_[i] * x[i];
          dG.data()[i] = -dy_[i] * h[i];
          dA.data()[i] = dy_[i] * (1.0 - g[i]);
          di[i] = dy_[i] * z[i];
        }
        for (std::size_t u = units.size(); u-- > 3;) {
          const Mat dpre = through_activation(act, pre[u], post[u], std::move(dA));
          Mat dprev(B, n);
          unit_backward(params, units[u], X, u == 3 ? c.gated_state[k] : post[u - 1], dpre,
                        grads, &dprev);
          dA = std::move(dprev);
        }
        // dA now holds the gradient with respect to S * R.
        for (std::size_t i = 0; i < m; ++i) {
          di[i] += dA.data()[i] * r[i];
          dR.data()[i] = dA.data()[i] * x[i];
        }
        unit_backward(params, units[0], X, in, through_activation(act, pre[0], post[0], dZ),
                      grads, &dIn);
        unit_backward(params, units[1], X, in, through_activation(act, pre[1], post[1], dG),
                      grads, &dIn);
        unit_backward(params, units[2], X, in, through_activation(act, pre[2], post[2], dR),
                      grads, &dIn);
        break;
      }
    }
    dY = std::move(dIn);
  }

  if (spec_.kind != LayerKind::Dense) unit_backward(params, input_, X, X, dY, grads, nullptr);
}

void write_model(const Model& model, std::ostream& out, std::string_view provenance) {
  Network(model.spec).check(model.params);
  out << "# optnet-model v1";
  if (!provenance.empty()) out << ' ' << provenance;
  out << '\n' << "spec " << format_spec(model.spec) << '\n';
  std::string line;
  for (std::size_t i = 0; i < model.params.size(); ++i) {
    const Mat& m = model.params.at(i);
    out << "param " << model.params.name(i) << ' ' << m.rows() << ' ' << m.cols() << '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
      line.clear();
      for (std::size_t j = 0; j < m.cols(); ++j) {
        if (j) line += ' ';
        line += text::format_double(m(r, j));
      }
      line += '\n';
      out << line;
    }
  }
}

void write_model(const Model& model, const std::filesystem::path& path,
                 std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_model(model, out, provenance);
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

Model read_model(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# optnet-model v1")) {
    throw FormatError("model: missing '# optnet-model v1' header");
  }
  if (!std::getline(in, line) || !line.starts_with("spec ")) {
    throw FormatError("model: missing spec line");
  }
  Model model;
  model.spec = parse_spec(std::string_view(line).substr(5));
  for (const auto& shape : param_layout(model.spec)) {
    if (!std::getline(in, line)) throw FormatError("model: missing parameter '" + shape.name + "'");
    const auto head = text::split(text::trim(line), ' ');
    if (head.size() != 4 || head[0] != "param" || head[1] != shape.name ||
        text::parse_u64(head[2]) != shape.rows || text::parse_u64(head[3]) != shape.cols) {
      throw FormatError("model: expected 'param " + shape.name + " " +
                        std::to_string(shape.rows) + " " + std::to_string(shape.cols) +
                        "', found '" + line + "'");
    }
    Mat m(shape.rows, shape.cols);
    for (std::size_t r = 0; r < shape.rows; ++r) {
      if (!std::getline(in, line)) throw FormatError("model: truncated parameter '" + shape.name + "'");
      const auto fields = text::split(text::trim(line), ' ');
      if (fields.size() != shape.cols) {
        throw FormatError("model: wrong value count in '" + shape.name + "'");
      }
      for (std::size_t j = 0; j < shape.cols; ++j) m(r, j) = text::parse_double(fields[j]);
    }
    model.params.add(shape.name, std::move(m));
  }
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) throw FormatError("model: trailing content");
  }
  return model;
}

Model read_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_model(in);
}

}  // namespace optnet::nn
