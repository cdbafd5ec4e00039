#include "optnet/optim/optim.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/simd/kernels.hpp"
#include "optnet/util/text.hpp"

namespace optnet::optim {

LossResult mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) {
    throw DimensionError("mse_loss: " + std::to_string(pred.size()) + " predictions for " +
                         std::to_string(target.size()) + " targets");
  }
  if (pred.empty()) throw DimensionError("mse_loss: empty input");
  const double n = static_cast<double>(pred.size());
  LossResult out{0.0, Vec(pred.size())};
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double e = pred[i] - target[i];
    out.value += e * e;
    out.grad[i] = 2.0 * e / n;
  }
  out.value /= n;
  return out;
}

namespace {

void require_layout(const nn::ParamSet& a, const nn::ParamSet& b, const char* op) {
  if (!a.same_layout(b)) throw DimensionError(std::string(op) + ": parameter layouts differ");
}

}  // namespace

void sgd_step_inplace(nn::ParamSet& params, const nn::ParamSet& grads, double lr) {
  require_layout(params, grads, "sgd_step");
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < params.size(); ++i) {
    k.axpy(params.at(i).size(), -lr, grads.at(i).data(), params.at(i).data());
  }
}

nn::ParamSet sgd_step(const nn::ParamSet& params, const nn::ParamSet& grads, double lr) {
  nn::ParamSet out = params;
  sgd_step_inplace(out, grads, lr);
  return out;
}

AdamState::AdamState(const nn::ParamSet& like, AdamSettings settings)
    : s_(settings), m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamState::step(nn::ParamSet& params, const nn::ParamSet& grads, double lr) {
  require_layout(params, grads, "adam");
  require_layout(params, m_, "adam");
  ++t_;
  const double c1 = 1.0 - std::pow(s_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(s_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params.at(i).data();
    double* m = m_.at(i).data();
    double* v = v_.at(i).data();
    const double* g = grads.at(i).data();
    for (std::size_t j = 0; j < params.at(i).size(); ++j) {
      m[j] = s_.beta1 * m[j] + (1.0 - s_.beta1) * g[j];
      v[j] = s_.beta2 * v[j] + (1.0 - s_.beta2) * g[j] * g[j];
      const double denom = std::sqrt(v[j] / c2) + s_.epsilon;
      if (denom > 0.0) p[j] -= lr * (m[j] / c1) / denom;
    }
  }
}

std::string_view to_string(Optimizer o) { return o == Optimizer::Adam ? "adam" : "sgd"; }

Optimizer parse_optimizer(std::string_view name) {
  if (name == "sgd") return Optimizer::PlainSgd;
  if (name == "adam") return Optimizer::Adam;
  throw UsageError("unknown optimizer '" + std::string(name) + "' (sgd, adam)");
}

void validate(const TrainConfig& cfg) {
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw UsageError("train config: learning_rate must be > 0");
  }
  if (cfg.batch_size == 0) throw UsageError("train config: batch_size must be >= 1");
  if (cfg.epochs == 0) throw UsageError("train config: epochs must be >= 1");
}

void write_history(const TrainHistory& h, std::ostream& out, std::string_view provenance) {
  out << "# optnet train-history";
  if (!provenance.empty()) out << ' ' << provenance;
  out << "\nepoch,train_loss,val_loss,seconds\n";
  for (const auto& e : h.epochs) {
    out << e.epoch << ',' << text::format_double(e.train_loss) << ','
        << text::format_double(e.val_loss) << ',' << text::format_double(e.seconds) << '\n';
  }
}

void write_history(const TrainHistory& h, const std::filesystem::path& path,
                   std::string_view provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_history(h, out, provenance);
}

Vec predict(const nn::Network& net, const nn::ParamSet& params, const Mat& inputs) {
  constexpr std::size_t block = 2048;
  Vec out(inputs.rows());
  for (std::size_t start = 0; start < inputs.rows(); start += block) {
    const std::size_t rows = std::min(block, inputs.rows() - start);
    Mat X(rows, inputs.cols(),
          Vec(inputs.row(start).begin(), inputs.row(start).begin() +
                                             static_cast<std::ptrdiff_t>(rows * inputs.cols())));
    const Vec y = net.forward(params, X);
    std::copy(y.begin(), y.end(), out.begin() + static_cast<std::ptrdiff_t>(start));
  }
  return out;
}

namespace {

double grid_loss(const nn::Network& net, const nn::ParamSet& params,
                 const sampling::SampleGrid& grid) {
  return mse_loss(predict(net, params, grid.inputs), grid.labels).value;
}

void require_grid(const nn::NetworkSpec& spec, const sampling::SampleGrid& g, const char* what) {
  if (g.size() == 0) throw DimensionError(std::string(what) + " grid is empty");
  if (g.dim() != spec.input_dim) {
    throw DimensionError(std::string(what) + " grid has " + std::to_string(g.dim()) +
                         " inputs, network expects " + std::to_string(spec.input_dim));
  }
}

}  // namespace

double evaluate(const nn::NetworkSpec& spec, const nn::ParamSet& params,
                const sampling::SampleGrid& grid) {
  require_grid(spec, grid, "test");
  return grid_loss(nn::Network(spec), params, grid);
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed,
                                     std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng = RngStream(shuffle_seed).child(epoch);
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

TrainResult train(const nn::NetworkSpec& spec, const sampling::SampleGrid& train_grid,
                  const sampling::SampleGrid& val_grid, const TrainConfig& cfg) {
  return train_from(spec, nn::Network(spec).init_params(cfg.init_seed), train_grid, val_grid,
                    cfg);
}

TrainResult train_from(const nn::NetworkSpec& spec, nn::ParamSet initial,
                       const sampling::SampleGrid& train_grid,
                       const sampling::SampleGrid& val_grid, const TrainConfig& cfg) {
  if (cfg.learning_rate < 0.0 || !std::isfinite(cfg.learning_rate)) {
    throw UsageError("train: learning_rate must be finite and >= 0");
  }
  if (cfg.batch_size == 0) throw UsageError("train: batch_size must be >= 1");
  if (cfg.epochs == 0) throw UsageError("train: epochs must be >= 1");
  require_grid(spec, train_grid, "training");
  require_grid(spec, val_grid, "validation");

  const nn::Network net(spec);
  net.check(initial);
  TrainResult result{std::move(initial), {}};
  nn::ParamSet& params = result.params;
  nn::ParamSet grads = params.zeros_like();
  std::unique_ptr<AdamState> adam;
  if (cfg.optimizer == Optimizer::Adam) adam = std::make_unique<AdamState>(params, cfg.adam);

  const std::size_t n = train_grid.size();
  const std::size_t d = train_grid.dim();
  nn::LayerActivations cache;
  Mat X;
  Vec y;

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto order = epoch_order(n, cfg.shuffle_seed, epoch);

    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, n - start);
      if (X.rows() != rows) {
        X = Mat(rows, d);
        y.resize(rows);
      }
      for (std::size_t i = 0; i < rows; ++i) {
        const auto src = train_grid.inputs.row(order[start + i]);
        std::copy(src.begin(), src.end(), X.row(i).begin());
        y[i] = train_grid.labels[order[start + i]];
      }
      const Vec pred = net.forward(params, X, &cache);
      const LossResult loss = mse_loss(pred, y);
      if (!std::isfinite(loss.value)) {
        throw DivergenceError(epoch, "training diverged in epoch " + std::to_string(epoch) +
                                         " (non-finite batch loss)");
      }
      net.backward_into(params, cache, loss.grad, grads);
      if (adam) {
        adam->step(params, grads, cfg.learning_rate);
      } else {
        sgd_step_inplace(params, grads, cfg.learning_rate);
      }
    }

    EpochRecord rec{epoch, grid_loss(net, params, train_grid), grid_loss(net, params, val_grid),
                    0.0};
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.history.epochs.push_back(rec);
    if (cfg.on_epoch) cfg.on_epoch(rec);
    if (!std::isfinite(rec.train_loss) || !std::isfinite(rec.val_loss)) {
      throw DivergenceError(epoch, "training diverged in epoch " + std::to_string(epoch) +
                                       " (non-finite full-set loss)");
    }
  }
  return result;
}

}  // namespace optnet::optim
