#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "optnet/math/matrix.hpp"
#include "optnet/nn/network.hpp"
#include "optnet/sampling/dataset.hpp"

namespace optnet::optim {

struct LossResult {
  double value;
  Vec grad;  // d loss / d pred = 2 (pred - target) / n
};

/// Mean squared error and its gradient with respect to the predictions.
LossResult mse_loss(std::span<const double> pred, std::span<const double> target);

/// theta - lr * grad, parameter by parameter.
nn::ParamSet sgd_step(const nn::ParamSet& params, const nn::ParamSet& grads, double lr);
void sgd_step_inplace(nn::ParamSet& params, const nn::ParamSet& grads, double lr);

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam moments for one parameter set.
class AdamState {
 public:
  AdamState(const nn::ParamSet& like, AdamSettings settings);
  void step(nn::ParamSet& params, const nn::ParamSet& grads, double lr);
  std::size_t steps() const noexcept { return t_; }

 private:
  AdamSettings s_;
  nn::ParamSet m_;
  nn::ParamSet v_;
  std::size_t t_ = 0;
};

enum class Optimizer { PlainSgd, Adam };
std::string_view to_string(Optimizer o);
Optimizer parse_optimizer(std::string_view name);

struct EpochRecord {
  std::size_t epoch;  // 1-based
  double train_loss;
  double val_loss;
  double seconds;
};

struct TrainConfig {
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  std::size_t epochs = 200;
  std::uint64_t shuffle_seed = 1;
  std::uint64_t init_seed = 1;
  Optimizer optimizer = Optimizer::PlainSgd;
  AdamSettings adam;
  // Called after every epoch, before the divergence check.
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Throws UsageError unless learning_rate > 0, batch_size >= 1 and epochs >= 1.
void validate(const TrainConfig& cfg);

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

/// Comma-separated "epoch,train_loss,val_loss,seconds" rows under a "# ..." line.
void write_history(const TrainHistory& h, std::ostream& out, std::string_view provenance = {});
void write_history(const TrainHistory& h, const std::filesystem::path& path,
                   std::string_view provenance = {});

struct TrainResult {
  nn::ParamSet params;
  TrainHistory history;
};

/// Row order of one epoch: a permutation of 0..n-1 from RngStream(shuffle_seed).child(epoch).
/// Batches are consecutive runs of it, the last one possibly short.
std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t shuffle_seed,
                                     std::size_t epoch);

/// Mini-batch training from the spec's initialization with cfg.init_seed.
///
/// Each epoch shuffles the training rows with a stream derived from
/// cfg.shuffle_seed and the epoch, steps once per batch (the last batch may be
/// short), then records the loss over the full training and validation grids.
/// A zero learning rate is accepted here and leaves the parameters unchanged.
/// Throws DivergenceError when a loss is not finite.
TrainResult train(const nn::NetworkSpec& spec, const sampling::SampleGrid& train_grid,
                  const sampling::SampleGrid& val_grid, const TrainConfig& cfg);
TrainResult train_from(const nn::NetworkSpec& spec, nn::ParamSet initial,
                       const sampling::SampleGrid& train_grid,
                       const sampling::SampleGrid& val_grid, const TrainConfig& cfg);

/// Predictions for every row, in blocks.
Vec predict(const nn::Network& net, const nn::ParamSet& params, const Mat& inputs);

/// Mean squared error of the network on `grid`.
double evaluate(const nn::NetworkSpec& spec, const nn::ParamSet& params,
                const sampling::SampleGrid& grid);

}  // namespace optnet::optim
