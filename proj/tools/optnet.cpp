#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "optnet/harness/experiment.hpp"
#include "optnet/math/errors.hpp"
#include "optnet/nn/network.hpp"
#include "optnet/optim/optim.hpp"
#include "optnet/oracle/oracles.hpp"
#include "optnet/sampling/dataset.hpp"
#include "optnet/simd/kernels.hpp"
#include "optnet/version.hpp"

namespace fs = std::filesystem;
using namespace optnet;

namespace {

constexpr int kUsageExit = 2;

int cmd_generate(const std::string& problem, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
  const auto grid = sampling::build_dataset(sampling::parse_problem(problem), n, seed);
  if (out == "-") {
    sampling::write_dataset(grid, std::cout);
  } else {
    sampling::write_dataset(grid, fs::path(out));
    std::cerr << "wrote " << grid.size() << " rows to " << out;
    if (!grid.resampled_rows.empty()) {
      std::cerr << " (" << grid.resampled_rows.size() << " resampled)";
    }
    std::cerr << '\n';
  }
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& output_dir, bool quiet) {
  auto cfg = harness::load_config(config_path);
  if (!output_dir.empty()) cfg.output_dir = output_dir;
  if (cfg.output_dir.empty()) cfg.output_dir = ".";
  if (!quiet) {
    cfg.train.on_epoch = [](const optim::EpochRecord& e) {
      std::fprintf(stderr, "epoch %zu train %.6e val %.6e (%.1fs)\n", e.epoch, e.train_loss,
                   e.val_loss, e.seconds);
    };
  }
  const auto rec = harness::run_experiment(cfg);
  harness::write_records({rec}, std::cout);
  return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset_path) {
  const auto model = nn::read_model(fs::path(model_path));
  const auto grid = sampling::read_dataset(fs::path(dataset_path));
  if (grid.dim() != model.spec.input_dim) {
    throw UsageError("model expects " + std::to_string(model.spec.input_dim) +
                     " inputs, dataset has " + std::to_string(grid.dim()));
  }
  const double mse = optim::evaluate(model.spec, model.params, grid);
  std::printf("mse=%.9e n=%zu problem=%s\n", mse, grid.size(),
              std::string(sampling::to_string(grid.problem)).c_str());
  return 0;
}

struct SuiteArgs {
  std::string name;
  std::string problem;
  std::string scale = "desk";
  std::vector<std::uint64_t> seeds{1};
  std::size_t epochs = 0;
  std::size_t n_samples = 0;
  std::size_t test_n = 0;
  double learning_rate = 1e-5;
  std::size_t batch_size = 64;
  std::string optimizer = "sgd";
  std::string out = "results";
};

int cmd_suite(const SuiteArgs& a) {
  const auto problem = sampling::parse_problem(a.problem);
  harness::SuiteOptions o;
  o.scale = harness::parse_scale(a.scale);
  o.seeds = a.seeds;
  o.epochs = a.epochs;
  o.n_samples = a.n_samples;
  o.test_n = a.test_n;
  o.learning_rate = a.learning_rate;
  o.batch_size = a.batch_size;
  o.optimizer = optim::parse_optimizer(a.optimizer);
  o.output_dir = a.out;
  o.on_record = [](const harness::RunRecord& r) {
    std::fprintf(stderr, "%-20s seed %llu params %zu mse %.4e time %.4fh\n", r.model.c_str(),
                 static_cast<unsigned long long>(r.seed), r.parameters, r.test_mse,
                 r.training_hours);
  };
  harness::suite_entries(a.name, problem);  // unknown names fail before any work
  const auto records = harness::run_suite(a.name, problem, o);
  const fs::path prefix = fs::path(a.out) / (a.name + "_" + a.problem + "_table");
  for (const auto& p : harness::report(records, harness::ReportFormat::Table, prefix)) {
    std::cerr << "wrote " << p.string() << '\n';
  }
  std::cout << harness::render_table(harness::sorted_for_report(records));
  return 0;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& format,
               const std::string& out) {
  const auto fmt = harness::parse_report_format(format);
  std::vector<harness::RunRecord> records;
  for (const auto& in : inputs) {
    auto part = harness::read_records(fs::path(in));
    records.insert(records.end(), part.begin(), part.end());
  }
  for (const auto& p : harness::report(records, fmt, out)) std::cout << p.string() << '\n';
  if (fmt == harness::ReportFormat::Table) {
    std::cout << harness::render_table(harness::sorted_for_report(records));
  }
  return 0;
}

int cmd_oracle(const std::vector<std::string>& checks, const oracle::OracleOptions& o) {
  bool all = true;
  for (const auto& name : checks) {
    const auto rep = oracle::run_check(name, o);
    oracle::print_report(rep, std::cout);
    all = all && rep.pass();
  }
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"optnet: option-pricing networks, data generation and experiments"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::string isa;
  app.add_option("--isa", isa, "Kernel set: scalar or avx2 (default: best available)");

  std::string problem;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  std::string out;
  auto* gen = app.add_subcommand("generate", "Write an LHS dataset with ground-truth labels");
  gen->add_option("--problem", problem, "bs, heston, iv or tiv")->required();
  gen->add_option("--n", n, "Number of rows")->required()->check(CLI::PositiveNumber);
  gen->add_option("--seed", seed, "Sampling seed")->capture_default_str();
  gen->add_option("--out", out, "Output file, or - for stdout")->required();

  std::string config;
  std::string train_out;
  bool quiet = false;
  auto* train = app.add_subcommand("train", "Train one network from a key=value config file");
  train->add_option("--config", config, "Config file")->required()->check(CLI::ExistingFile);
  train->add_option("--output-dir", train_out, "Overrides output_dir from the config");
  train->add_flag("--quiet", quiet, "No per-epoch progress");

  std::string model_path;
  std::string dataset_path;
  auto* eval = app.add_subcommand("evaluate", "Test MSE of a saved model on a dataset");
  eval->add_option("--model", model_path, "Model file")->required()->check(CLI::ExistingFile);
  eval->add_option("--dataset", dataset_path, "Dataset file")
      ->required()
      ->check(CLI::ExistingFile);

  SuiteArgs sa;
  auto* suite = app.add_subcommand("suite", "Run a predefined comparison suite");
  suite->add_option("--name", sa.name, "mlp12, highway, dgm, dgm_variants or equal_params")
      ->required();
  suite->add_option("--problem", sa.problem, "bs, heston, iv or tiv")->required();
  suite->add_option("--scale", sa.scale, "desk or paper")->capture_default_str();
  suite->add_option("--seeds", sa.seeds, "Seeds; each gets its own dataset")->delimiter(',');
  suite->add_option("--epochs", sa.epochs, "Override the scale's epoch count");
  suite->add_option("--n-samples", sa.n_samples, "Override the scale's sample count");
  suite->add_option("--test-n", sa.test_n, "Override the scale's test size");
  suite->add_option("--learning-rate", sa.learning_rate)->capture_default_str();
  suite->add_option("--batch-size", sa.batch_size)->capture_default_str();
  suite->add_option("--optimizer", sa.optimizer, "sgd or adam")->capture_default_str();
  suite->add_option("--out", sa.out, "Output directory")->capture_default_str();

  std::vector<std::string> report_in;
  std::string report_format = "table";
  std::string report_out = "report";
  auto* rep = app.add_subcommand("report", "Render records files as a table or plot data");
  rep->add_option("--in", report_in, "Records file(s)")->required()->check(CLI::ExistingFile);
  rep->add_option("--format", report_format, "table or plotdata")->capture_default_str();
  rep->add_option("--out", report_out, "Output path prefix")->capture_default_str();

  std::vector<std::string> checks;
  oracle::OracleOptions oo;
  auto* orc = app.add_subcommand("oracle", "Run validation oracles and print pass/fail");
  orc->add_option("--check", checks, "bs, heston, iv, grad or params (repeatable)")
      ->required()
      ->check(CLI::IsMember(oracle::check_names()));
  orc->add_option("--seed", oo.seed)->capture_default_str();
  orc->add_option("--points", oo.grid_points, "Grid size for bs and iv")->capture_default_str();
  orc->add_option("--paths", oo.mc_paths, "Monte Carlo paths for heston")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (!isa.empty()) simd::set_active_isa(simd::parse_isa(isa));
    if (*gen) return cmd_generate(problem, n, seed, out);
    if (*train) return cmd_train(config, train_out, quiet);
    if (*eval) return cmd_evaluate(model_path, dataset_path);
    if (*suite) return cmd_suite(sa);
    if (*rep) return cmd_report(report_in, report_format, report_out);
    if (*orc) return cmd_oracle(checks, oo);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsageExit;
  } catch (const DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageExit;
}
