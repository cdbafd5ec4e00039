#include "optnet/harness/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "optnet/math/errors.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/nn/network.hpp"
#include "optnet/util/text.hpp"
#include "optnet/version.hpp"

namespace optnet::harness {

using sampling::ProblemKind;

std::string_view to_string(Scale s) { return s == Scale::Paper ? "paper" : "desk"; }

Scale parse_scale(std::string_view name) {
  if (name == "desk") return Scale::Desk;
  if (name == "paper") return Scale::Paper;
  throw UsageError("unknown scale '" + std::string(name) + "' (desk, paper)");
}

ScaleSizes sizes_for(Scale s) {
  if (s == Scale::Paper) return {1'000'000, 100'000, 200};
  return {50'000, 10'000, 50};
}

void validate(const ExperimentConfig& cfg) {
  nn::validate(cfg.spec);
  optim::validate(cfg.train);
  if (cfg.name.empty() || cfg.name.find_first_of("/\\ ") != std::string::npos) {
    throw UsageError("experiment: name must be a non-empty word without path separators");
  }
  if (cfg.spec.input_dim != sampling::input_dim(cfg.problem)) {
    throw UsageError("experiment: problem '" + std::string(to_string(cfg.problem)) + "' has " +
                     std::to_string(sampling::input_dim(cfg.problem)) + " inputs, spec has " +
                     std::to_string(cfg.spec.input_dim));
  }
  if (cfg.dataset.empty() && cfg.n_samples < 2) {
    throw UsageError("experiment: n_samples must be >= 2");
  }
  if (cfg.test_n == 0) throw UsageError("experiment: test_n must be >= 1");
  if (!(cfg.train_frac > 0.0 && cfg.train_frac < 1.0)) {
    throw UsageError("experiment: train_frac must lie in (0, 1)");
  }
  if (!cfg.dataset.empty() && !std::filesystem::exists(cfg.dataset)) {
    throw UsageError("experiment: dataset '" + cfg.dataset.string() + "' does not exist");
  }
}

namespace {

const std::set<std::string, std::less<>> kConfigKeys = {
    "name",          "problem",      "kind",         "layers",     "nodes",
    "n_sub",         "activation",   "gate_activation", "initializer", "learning_rate",
    "batch_size",    "epochs",       "optimizer",    "shuffle_seed", "init_seed",
    "data_seed",     "n_samples",    "test_n",       "train_frac", "dataset",
    "output_dir"};

std::size_t as_size(const std::string& v) { return static_cast<std::size_t>(text::parse_u64(v)); }

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  std::map<std::string, std::string, std::less<>> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    const auto body = text::trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos) {
      throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key(text::trim(body.substr(0, eq)));
    const std::string value(text::trim(body.substr(eq + 1)));
    if (!kConfigKeys.contains(key)) {
      throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (!kv.emplace(key, value).second) {
      throw UsageError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
  }

  auto get = [&](std::string_view key) -> const std::string* {
    const auto it = kv.find(key);
    return it == kv.end() ? nullptr : &it->second;
  };

  ExperimentConfig cfg;
  try {
    if (auto v = get("name")) cfg.name = *v;
    if (auto v = get("problem")) cfg.problem = sampling::parse_problem(*v);
    const auto kind = get("kind") ? nn::parse_layer_kind(*get("kind")) : nn::LayerKind::Dense;
    const std::size_t layers = get("layers") ? as_size(*get("layers")) : 3;
    const std::size_t nodes = get("nodes") ? as_size(*get("nodes")) : 50;
    cfg.spec = nn::default_spec(kind, sampling::input_dim(cfg.problem), layers, nodes);
    if (auto v = get("n_sub")) cfg.spec.n_sub = as_size(*v);
    if (auto v = get("activation")) cfg.spec.activation = parse_activation(*v);
    if (auto v = get("gate_activation")) cfg.spec.gate_activation = parse_activation(*v);
    if (auto v = get("initializer")) cfg.spec.initializer = parse_initializer(*v);
    if (auto v = get("learning_rate")) cfg.train.learning_rate = text::parse_double(*v);
    if (auto v = get("batch_size")) cfg.train.batch_size = as_size(*v);
    if (auto v = get("epochs")) cfg.train.epochs = as_size(*v);
    if (auto v = get("optimizer")) cfg.train.optimizer = optim::parse_optimizer(*v);
    if (auto v = get("shuffle_seed")) cfg.train.shuffle_seed = text::parse_u64(*v);
    if (auto v = get("init_seed")) cfg.train.init_seed = text::parse_u64(*v);
    if (auto v = get("data_seed")) cfg.data_seed = text::parse_u64(*v);
    if (auto v = get("n_samples")) cfg.n_samples = as_size(*v);
    if (auto v = get("test_n")) cfg.test_n = as_size(*v);
    if (auto v = get("train_frac")) cfg.train_frac = text::parse_double(*v);
    if (auto v = get("dataset")) cfg.dataset = *v;
    if (auto v = get("output_dir")) cfg.output_dir = *v;
  } catch (const FormatError& e) {
    throw UsageError(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config '" + path.string() + "'");
  return parse_config(in);
}

void write_config(const ExperimentConfig& cfg, std::ostream& out) {
  out << "name=" << cfg.name << '\n'
      << "problem=" << to_string(cfg.problem) << '\n'
      << "kind=" << to_string(cfg.spec.kind) << '\n'
      << "layers=" << cfg.spec.layers << '\n'
      << "nodes=" << cfg.spec.nodes << '\n'
      << "n_sub=" << cfg.spec.n_sub << '\n'
      << "activation=" << to_string(cfg.spec.activation) << '\n'
      << "gate_activation=" << to_string(cfg.spec.gate_activation) << '\n'
      << "initializer=" << to_string(cfg.spec.initializer) << '\n'
      << "learning_rate=" << text::format_double(cfg.train.learning_rate) << '\n'
      << "batch_size=" << cfg.train.batch_size << '\n'
      << "epochs=" << cfg.train.epochs << '\n'
      << "optimizer=" << to_string(cfg.train.optimizer) << '\n'
      << "shuffle_seed=" << cfg.train.shuffle_seed << '\n'
      << "init_seed=" << cfg.train.init_seed << '\n'
      << "data_seed=" << cfg.data_seed << '\n'
      << "n_samples=" << cfg.n_samples << '\n'
      << "test_n=" << cfg.test_n << '\n'
      << "train_frac=" << text::format_double(cfg.train_frac) << '\n';
  if (!cfg.dataset.empty()) out << "dataset=" << cfg.dataset.string() << '\n';
  if (!cfg.output_dir.empty()) out << "output_dir=" << cfg.output_dir.string() << '\n';
}

nn::NetworkSpec record_spec(const RunRecord& r) {
  auto spec = nn::default_spec(r.kind, sampling::input_dim(r.problem), r.layers, r.nodes);
  spec.n_sub = r.n_sub;
  return spec;
}

namespace {

constexpr const char* kRecordColumns =
    "model,problem,kind,layers,nodes,n_sub,parameters,training_time_h,mse,seed";

std::string provenance_line(const std::string& what, const std::vector<std::uint64_t>& seeds) {
  std::string line = "# optnet " + what + " version=" + kVersion + " seeds=";
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (i) line += ';';
    line += std::to_string(seeds[i]);
  }
  return line;
}

std::vector<std::uint64_t> seeds_of(const std::vector<RunRecord>& records) {
  std::vector<std::uint64_t> seeds;
  for (const auto& r : records) {
    if (std::find(seeds.begin(), seeds.end(), r.seed) == seeds.end()) seeds.push_back(r.seed);
  }
  return seeds;
}

}  // namespace

void write_records(const std::vector<RunRecord>& records, std::ostream& out) {
  out << provenance_line("run-records", seeds_of(records)) << '\n' << kRecordColumns << '\n';
  for (const auto& r : records) {
    if (r.model.find(',') != std::string::npos) {
      throw UsageError("record model name may not contain ','");
    }
    out << r.model << ',' << to_string(r.problem) << ',' << to_string(r.kind) << ','
        << r.layers << ',' << r.nodes << ',' << r.n_sub << ',' << r.parameters << ','
        << text::format_double(r.training_hours) << ',' << text::format_double(r.test_mse)
        << ',' << r.seed << '\n';
  }
}

void write_records(const std::vector<RunRecord>& records, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_records(records, out);
}

std::vector<RunRecord> read_records(std::istream& in) {
  std::string line;
  while (std::getline(in, line) && line.starts_with("#")) {
  }
  if (text::trim(line) != kRecordColumns) {
    throw FormatError("records: expected header '" + std::string(kRecordColumns) + "'");
  }
  std::vector<RunRecord> out;
  while (std::getline(in, line)) {
    if (text::trim(line).empty() || line.starts_with("#")) continue;
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 10) throw FormatError("records: row with " + std::to_string(f.size()) + " fields");
    RunRecord r;
    try {
      r.model = std::string(f[0]);
      r.problem = sampling::parse_problem(f[1]);
      r.kind = nn::parse_layer_kind(f[2]);
    } catch (const UsageError& e) {
      throw FormatError(std::string("records: ") + e.what());
    }
    r.layers = text::parse_u64(f[3]);
    r.nodes = text::parse_u64(f[4]);
    r.n_sub = text::parse_u64(f[5]);
    r.parameters = text::parse_u64(f[6]);
    r.training_hours = text::parse_double(f[7]);
    r.test_mse = text::parse_double(f[8]);
    r.seed = text::parse_u64(f[9]);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_records(in);
}

sampling::DataSplit prepare_data(const ExperimentConfig& cfg) {
  sampling::SampleGrid grid = cfg.dataset.empty()
                                  ? sampling::build_dataset(cfg.problem, cfg.n_samples, cfg.data_seed)
                                  : sampling::read_dataset(cfg.dataset);
  if (grid.problem != cfg.problem) {
    throw UsageError("dataset holds problem '" + std::string(to_string(grid.problem)) +
                     "', config asks for '" + std::string(to_string(cfg.problem)) + "'");
  }
  return sampling::split_dataset(grid, cfg.train_frac, cfg.test_n,
                                 derive_seed(grid.seed, "split"));
}

RunRecord run_experiment(const ExperimentConfig& cfg, const sampling::DataSplit& data) {
  validate(cfg);
  const std::string provenance = "version=" + std::string(kVersion) +
                                 " data_seed=" + std::to_string(cfg.data_seed) +
                                 " init_seed=" + std::to_string(cfg.train.init_seed) +
                                 " shuffle_seed=" + std::to_string(cfg.train.shuffle_seed);
  const bool write = !cfg.output_dir.empty();
  if (write) std::filesystem::create_directories(cfg.output_dir);
  const auto out_path = [&](const std::string& suffix) {
    return cfg.output_dir / (cfg.name + suffix);
  };

  optim::TrainHistory partial;
  optim::TrainConfig train_cfg = cfg.train;
  train_cfg.on_epoch = [&](const optim::EpochRecord& e) {
    partial.epochs.push_back(e);
    if (cfg.train.on_epoch) cfg.train.on_epoch(e);
  };

  optim::TrainResult result;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    result = optim::train(cfg.spec, data.train, data.validation, train_cfg);
  } catch (const DivergenceError&) {
    if (write) optim::write_history(partial, out_path(".history.csv"), provenance);
    throw;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  RunRecord rec;
  rec.model = cfg.name;
  rec.problem = cfg.problem;
  rec.kind = cfg.spec.kind;
  rec.layers = cfg.spec.layers;
  rec.nodes = cfg.spec.nodes;
  rec.n_sub = cfg.spec.n_sub;
  rec.parameters = nn::count_params(cfg.spec);
  rec.training_hours = seconds / 3600.0;
  rec.test_mse = optim::evaluate(cfg.spec, result.params, data.test);
  rec.seed = cfg.data_seed;

  if (write) {
    nn::write_model({cfg.spec, result.params}, out_path(".model"), provenance);
    optim::write_history(result.history, out_path(".history.csv"), provenance);
    write_records({rec}, out_path(".records.csv"));
  }
  return rec;
}

RunRecord run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  return run_experiment(cfg, prepare_data(cfg));
}

std::vector<std::string> suite_names() {
  return {"mlp12", "highway", "dgm", "dgm_variants", "equal_params"};
}

std::vector<SuiteEntry> suite_entries(std::string_view name, ProblemKind problem) {
  using nn::LayerKind;
  const std::size_t d = sampling::input_dim(problem);
  auto entry = [&](std::string model, LayerKind kind, std::size_t layers, std::size_t nodes) {
    return SuiteEntry{std::move(model), nn::default_spec(kind, d, layers, nodes)};
  };
  std::vector<SuiteEntry> out;
  if (name == "mlp12") {
    for (std::size_t layers : {2, 3}) {
      for (std::size_t nodes : {50, 100, 150, 200, 250, 500}) {
        out.push_back(entry("mlp_" + std::to_string(layers) + "x" + std::to_string(nodes),
                            LayerKind::Dense, layers, nodes));
      }
    }
  } else if (name == "highway") {
    out = {entry("small_mlp", LayerKind::Dense, 3, 50),
           entry("residual", LayerKind::Residual, 3, 50),
           entry("highway", LayerKind::Highway, 3, 50),
           entry("generalized_highway", LayerKind::GeneralizedHighway, 3, 50),
           entry("large_mlp", LayerKind::Dense, 3, 500)};
  } else if (name == "dgm") {
    out = {entry("small_mlp", LayerKind::Dense, 3, 50),
           entry("highway", LayerKind::Highway, 3, 50),
           entry("generalized_highway", LayerKind::GeneralizedHighway, 3, 50),
           entry("norec_dgm", LayerKind::NoRecDgm, 3, 50),
           entry("dgm", LayerKind::Dgm, 3, 50),
           entry("deep_dgm", LayerKind::DeepDgm, 3, 50),
           entry("large_mlp", LayerKind::Dense, 3, 500)};
  } else if (name == "dgm_variants") {
    out = {entry("highway", LayerKind::Highway, 3, 50),
           entry("generalized_highway", LayerKind::GeneralizedHighway, 3, 50),
           entry("norec_dgm", LayerKind::NoRecDgm, 3, 50),
           entry("dgm", LayerKind::Dgm, 3, 50),
           entry("deep_dgm", LayerKind::DeepDgm, 3, 50)};
  } else if (name == "equal_params") {
    out = {entry("highway", LayerKind::Highway, 4, 50),
           entry("generalized_highway", LayerKind::GeneralizedHighway, 3, 50),
           entry("dgm", LayerKind::Dgm, 2, 50)};
  } else {
    throw UsageError("unknown suite '" + std::string(name) +
                     "' (mlp12, highway, dgm, dgm_variants, equal_params)");
  }
  return out;
}

std::vector<RunRecord> run_suite(std::string_view name, ProblemKind problem,
                                 const SuiteOptions& options) {
  const auto entries = suite_entries(name, problem);
  if (options.seeds.empty()) throw UsageError("suite: at least one seed is required");
  const ScaleSizes sizes = sizes_for(options.scale);

  std::vector<RunRecord> records;
  for (const std::uint64_t seed : options.seeds) {
    ExperimentConfig base;
    base.problem = problem;
    base.n_samples = options.n_samples ? options.n_samples : sizes.n_samples;
    base.test_n = options.test_n ? options.test_n : sizes.test_n;
    base.data_seed = seed;
    base.train.epochs = options.epochs ? options.epochs : sizes.epochs;
    base.train.learning_rate = options.learning_rate;
    base.train.batch_size = options.batch_size;
    base.train.optimizer = options.optimizer;
    base.train.init_seed = seed;
    base.train.shuffle_seed = seed;
    if (!options.output_dir.empty()) base.output_dir = options.output_dir;
    const sampling::DataSplit data = prepare_data(base);

    for (const auto& e : entries) {
      ExperimentConfig cfg = base;
      cfg.name = e.model + "_" + std::string(to_string(problem)) + "_s" + std::to_string(seed);
      cfg.spec = e.spec;
      RunRecord rec = run_experiment(cfg, data);
      rec.model = e.model;
      if (options.on_record) options.on_record(rec);
      records.push_back(std::move(rec));
    }
  }
  if (!options.output_dir.empty()) {
    write_records(records, options.output_dir /
                               (std::string(name) + "_" + std::string(to_string(problem)) +
                                ".records.csv"));
  }
  return records;
}

ReportFormat parse_report_format(std::string_view name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "plotdata") return ReportFormat::PlotData;
  throw UsageError("unknown report format '" + std::string(name) + "' (table, plotdata)");
}

std::vector<RunRecord> sorted_for_report(std::vector<RunRecord> records) {
  if (records.empty()) throw UsageError("report: no records");
  for (const auto& r : records) {
    const std::size_t expected = nn::count_params(record_spec(r));
    if (r.parameters != expected) {
      throw FormatError("report: record '" + r.model + "' lists " +
                        std::to_string(r.parameters) + " parameters, its spec has " +
                        std::to_string(expected));
    }
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const RunRecord& a, const RunRecord& b) { return a.parameters < b.parameters; });
  return records;
}

namespace {

std::string with_thousands(std::size_t v) {
  std::string s = std::to_string(v);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

}  // namespace

std::string render_table(const std::vector<RunRecord>& records) {
  const std::vector<std::string> head = {"Model", "Layers", "Nodes", "Parameters",
                                         "Training Time (H)", "MSE"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : records) {
    rows.push_back({r.model, std::to_string(r.layers), std::to_string(r.nodes),
                    with_thousands(r.parameters), fixed2(r.training_hours), sci(r.test_mse)});
  }
  std::vector<std::size_t> width(head.size());
  for (std::size_t j = 0; j < head.size(); ++j) {
    width[j] = head[j].size();
    for (const auto& row : rows) width[j] = std::max(width[j], row[j].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      if (j) out << " | ";
      if (j == 0) {
        out << row[j] << std::string(width[j] - row[j].size(), ' ');
      } else {
        out << std::string(width[j] - row[j].size(), ' ') << row[j];
      }
    }
    out << '\n';
  };
  emit(head);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out << std::string(total + 3 * (width.size() - 1), '-') << '\n';
  for (const auto& row : rows) emit(row);
  return out.str();
}

std::vector<std::filesystem::path> report(const std::vector<RunRecord>& records,
                                          ReportFormat format,
                                          const std::filesystem::path& prefix) {
  const auto sorted = sorted_for_report(records);
  const std::string header = provenance_line("report", seeds_of(sorted));
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  auto open = [](const std::filesystem::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw FormatError("cannot open '" + p.string() + "' for writing");
    return out;
  };
  auto with_suffix = [&](const std::string& s) {
    return std::filesystem::path(prefix.string() + s);
  };

  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::Table) {
    const auto txt = with_suffix(".txt");
    open(txt) << header << '\n' << render_table(sorted);
    const auto csv = with_suffix(".csv");
    auto out = open(csv);
    write_records(sorted, out);
    written = {txt, csv};
  } else {
    const auto mse = with_suffix("_mse.dat");
    const auto time = with_suffix("_time.dat");
    auto a = open(mse);
    auto b = open(time);
    a << header << "\n# index mse model\n";
    b << header << "\n# index hours model\n";
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      a << i + 1 << ' ' << text::format_double(sorted[i].test_mse) << ' ' << sorted[i].model << '\n';
      b << i + 1 << ' ' << text::format_double(sorted[i].training_hours) << ' '
        << sorted[i].model << '\n';
    }
    written = {mse, time};
  }
  return written;
}

}  // namespace optnet::harness
