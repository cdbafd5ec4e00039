#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "optnet/nn/spec.hpp"
#include "optnet/optim/optim.hpp"
#include "optnet/sampling/box.hpp"
#include "optnet/sampling/dataset.hpp"

namespace optnet::harness {

enum class Scale { Desk, Paper };
std::string_view to_string(Scale s);
Scale parse_scale(std::string_view name);

struct ScaleSizes {
  std::size_t n_samples;
  std::size_t test_n;
  std::size_t epochs;
};

/// desk: 50k samples, 10k test, 50 epochs. paper: 1M samples, 100k test, 200 epochs.
ScaleSizes sizes_for(Scale s);

struct ExperimentConfig {
  std::string name = "run";
  sampling::ProblemKind problem = sampling::ProblemKind::BsPrice;
  nn::NetworkSpec spec;
  optim::TrainConfig train;
  std::size_t n_samples = 50000;
  std::size_t test_n = 10000;
  double train_frac = 0.8;
  std::uint64_t data_seed = 1;
  std::filesystem::path dataset;     // read instead of generating when set
  std::filesystem::path output_dir;  // nothing is written when empty
};

/// Throws UsageError on an inconsistent configuration.
void validate(const ExperimentConfig& cfg);

/// Flat key=value text, one key per line; '#' starts a comment.
///
/// Keys: name problem kind layers nodes n_sub activation gate_activation
/// initializer learning_rate batch_size epochs optimizer shuffle_seed
/// init_seed data_seed n_samples test_n train_frac dataset output_dir.
/// Unset network keys take the defaults of `kind`.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);
void write_config(const ExperimentConfig& cfg, std::ostream& out);

struct RunRecord {
  std::string model;
  sampling::ProblemKind problem = sampling::ProblemKind::BsPrice;
  nn::LayerKind kind = nn::LayerKind::Dense;
  std::size_t layers = 0;
  std::size_t nodes = 0;
  std::size_t n_sub = 1;
  std::size_t parameters = 0;
  double training_hours = 0.0;
  double test_mse = 0.0;
  std::uint64_t seed = 0;
};

/// Network spec a record was produced with (input size from the problem,
/// activations from the kind's defaults).
nn::NetworkSpec record_spec(const RunRecord& r);

void write_records(const std::vector<RunRecord>& records, std::ostream& out);
void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path);
std::vector<RunRecord> read_records(std::istream& in);
std::vector<RunRecord> read_records(const std::filesystem::path& path);

/// Data split used by run_experiment for the configuration.
sampling::DataSplit prepare_data(const ExperimentConfig& cfg);

/// Trains on `data`, evaluates on its test grid and, when output_dir is set,
/// writes <name>.model, <name>.history.csv and <name>.records.csv. Training
/// time covers the epoch loop only. On divergence the partial history is
/// written before the error propagates.
RunRecord run_experiment(const ExperimentConfig& cfg, const sampling::DataSplit& data);
RunRecord run_experiment(const ExperimentConfig& cfg);

struct SuiteEntry {
  std::string model;
  nn::NetworkSpec spec;
};

/// Suite names: mlp12, highway, dgm, dgm_variants, equal_params.
std::vector<std::string> suite_names();
std::vector<SuiteEntry> suite_entries(std::string_view name, sampling::ProblemKind problem);

struct SuiteOptions {
  Scale scale = Scale::Desk;
  std::vector<std::uint64_t> seeds = {1};
  // Zero keeps the scale's value.
  std::size_t n_samples = 0;
  std::size_t test_n = 0;
  std::size_t epochs = 0;
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  optim::Optimizer optimizer = optim::Optimizer::PlainSgd;
  std::filesystem::path output_dir;
  std::function<void(const RunRecord&)> on_record;
};

/// Every entry of the suite for every seed, sequentially. One dataset per
/// seed is shared by all models; seed s sets the data, init and shuffle seeds.
std::vector<RunRecord> run_suite(std::string_view name, sampling::ProblemKind problem,
                                 const SuiteOptions& options);

enum class ReportFormat { Table, PlotData };
ReportFormat parse_report_format(std::string_view name);

/// Records ordered by parameter count (stable). Throws UsageError when empty
/// and FormatError when a stored parameter count disagrees with its spec.
std::vector<RunRecord> sorted_for_report(std::vector<RunRecord> records);

/// Aligned text table with the columns
/// Model | Layers | Nodes | Parameters | Training Time (H) | MSE.
std::string render_table(const std::vector<RunRecord>& records);

/// table: <prefix>.txt and <prefix>.csv. plotdata: <prefix>_mse.dat and
/// <prefix>_time.dat, one "index value" row per record. Returns the paths.
std::vector<std::filesystem::path> report(const std::vector<RunRecord>& records,
                                          ReportFormat format,
                                          const std::filesystem::path& prefix);

}  // namespace optnet::harness
