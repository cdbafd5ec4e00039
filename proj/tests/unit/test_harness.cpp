#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <unistd.h>

#include "doctest.h"
#include "optnet/harness/experiment.hpp"
#include "optnet/math/errors.hpp"

using namespace optnet;
using namespace optnet::harness;
namespace fs = std::filesystem;
using sampling::ProblemKind;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("optnet_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::size_t count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

std::string read_all(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

ExperimentConfig small_config() {
  std::istringstream in(
      "# tiny run\n"
      "name=tiny\nproblem=bs\nkind=highway\nlayers=2\nnodes=6\n"
      "learning_rate=0.001\nbatch_size=32\nepochs=2\n"
      "n_samples=300\ntest_n=100\ndata_seed=4\n");
  return parse_config(in);
}

RunRecord record(const std::string& model, nn::LayerKind kind, std::size_t layers,
                 std::size_t nodes, double mse) {
  RunRecord r;
  r.model = model;
  r.kind = kind;
  r.layers = layers;
  r.nodes = nodes;
  r.n_sub = kind == nn::LayerKind::DeepDgm ? 3 : 1;
  r.parameters = nn::count_params(record_spec(r));
  r.test_mse = mse;
  r.training_hours = 0.01;
  r.seed = 1;
  return r;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = small_config();
  CHECK(cfg.name == "tiny");
  CHECK(cfg.spec.kind == nn::LayerKind::Highway);
  CHECK(cfg.spec.activation == Activation::Tanh);
  CHECK(cfg.spec.layers == 2);
  CHECK(cfg.train.epochs == 2);
  CHECK(cfg.train.learning_rate == 0.001);
  CHECK(cfg.data_seed == 4);

  std::ostringstream out;
  write_config(cfg, out);
  std::istringstream back(out.str());
  const auto again = parse_config(back);
  CHECK(again.spec == cfg.spec);
  CHECK(again.train.learning_rate == cfg.train.learning_rate);
  CHECK(again.n_samples == cfg.n_samples);

  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  CHECK_THROWS_AS(bad("epochs=0\n"), UsageError);
  CHECK_THROWS_AS(bad("colour=red\n"), UsageError);
  CHECK_THROWS_AS(bad("epochs=3\nepochs=4\n"), UsageError);
  CHECK_THROWS_AS(bad("just words\n"), UsageError);
  CHECK_THROWS_AS(bad("layers=three\n"), UsageError);
  CHECK_THROWS_AS(bad("dataset=/nonexistent/file.csv\n"), UsageError);
  CHECK_THROWS_AS(bad("problem=heston\nkind=mlp\n" "train_frac=1.5\n"), UsageError);
  CHECK(bad("problem=heston\n").spec.input_dim == 8);
  CHECK_THROWS_AS(load_config("/nonexistent/config.txt"), UsageError);
}

TEST_CASE("record files") {
  std::vector<RunRecord> rs = {record("a", nn::LayerKind::Dense, 2, 50, 1e-3),
                               record("b", nn::LayerKind::DeepDgm, 3, 50, 2.5e-7)};
  rs[1].problem = ProblemKind::TransformedImpliedVol;
  rs[1].seed = 3;
  std::stringstream ss;
  write_records(rs, ss);
  CHECK(ss.str().starts_with("# optnet run-records version="));
  const auto back = read_records(ss);
  REQUIRE(back.size() == 2);
  CHECK(back[1].model == "b");
  CHECK(back[1].problem == ProblemKind::TransformedImpliedVol);
  CHECK(back[1].n_sub == 3);
  CHECK(back[1].parameters == 49801);
  CHECK(back[1].test_mse == 2.5e-7);
  CHECK(back[1].seed == 3);

  std::istringstream bad("model,problem\n");
  CHECK_THROWS_AS(read_records(bad), FormatError);
  std::istringstream short_row(
      "model,problem,kind,layers,nodes,n_sub,parameters,training_time_h,mse,seed\na,bs,mlp\n");
  CHECK_THROWS_AS(read_records(short_row), FormatError);
}

TEST_CASE("suite definitions") {
  const auto mlp = suite_entries("mlp12", ProblemKind::BsPrice);
  std::multiset<std::size_t> counts;
  for (const auto& e : mlp) counts.insert(nn::count_params(e.spec));
  CHECK(counts == std::multiset<std::size_t>{2851, 10701, 23551, 41401, 64251, 253501, 5401,
                                             20801, 46201, 81601, 127001, 504001});

  const auto eq = suite_entries("equal_params", ProblemKind::HestonPrice);
  REQUIRE(eq.size() == 3);
  CHECK(nn::count_params(eq[0].spec) == 20901);
  CHECK(nn::count_params(eq[1].spec) == 23451);
  CHECK(nn::count_params(eq[2].spec) == 24101);

  const auto dgm = suite_entries("dgm", ProblemKind::TransformedImpliedVol);
  std::vector<nn::LayerKind> kinds;
  for (const auto& e : dgm) kinds.push_back(e.spec.kind);
  CHECK(kinds == std::vector<nn::LayerKind>{nn::LayerKind::Dense, nn::LayerKind::Highway,
                                            nn::LayerKind::GeneralizedHighway,
                                            nn::LayerKind::NoRecDgm, nn::LayerKind::Dgm,
                                            nn::LayerKind::DeepDgm, nn::LayerKind::Dense});
  CHECK(dgm.front().spec.nodes == 50);
  CHECK(dgm.back().spec.nodes == 500);

  for (const auto& name : suite_names()) {
    for (const auto& e : suite_entries(name, ProblemKind::HestonPrice)) {
      CHECK(e.spec.input_dim == 8);
    }
  }
  CHECK_THROWS_AS(suite_entries("transformers", ProblemKind::BsPrice), UsageError);
  CHECK(sizes_for(Scale::Paper).n_samples == 1'000'000);
  CHECK(sizes_for(Scale::Paper).test_n == 100'000);
  CHECK(sizes_for(Scale::Paper).epochs == 200);
  CHECK(sizes_for(Scale::Desk).n_samples == 50'000);
  CHECK(parse_scale("paper") == Scale::Paper);
  CHECK_THROWS_AS(parse_scale("huge"), UsageError);
}

TEST_CASE("report") {
  TempDir dir("report");
  const std::vector<RunRecord> rs = {record("big", nn::LayerKind::Dense, 3, 500, 1e-4),
                                     record("small", nn::LayerKind::Dense, 2, 50, 1e-2),
                                     record("gen", nn::LayerKind::GeneralizedHighway, 3, 50, 1e-5)};
  const auto sorted = sorted_for_report(rs);
  CHECK(sorted[0].model == "small");
  CHECK(sorted[1].model == "gen");
  CHECK(sorted[2].model == "big");

  const auto files = report(rs, ReportFormat::Table, dir.path / "t");
  REQUIRE(files.size() == 2);
  const std::string txt = read_all(files[0]);
  CHECK(txt.find("Model") != std::string::npos);
  CHECK(txt.find("Training Time (H)") != std::string::npos);
  CHECK(txt.find("504,001") != std::string::npos);
  CHECK(txt.find("small") < txt.find("big"));
  CHECK(read_records(files[1]).size() == 3);

  const auto plot = report(rs, ReportFormat::PlotData, dir.path / "p");
  REQUIRE(plot.size() == 2);
  for (const auto& f : plot) {
    std::ifstream in(f);
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      if (!line.starts_with("#")) ++rows;
    }
    CHECK(rows == rs.size());
  }

  const auto one = render_table({rs[1]});
  CHECK(std::count(one.begin(), one.end(), '\n') == 3);
  CHECK(one.starts_with("Model"));

  CHECK_THROWS_AS(sorted_for_report({}), UsageError);
  CHECK_THROWS_AS(report({}, ReportFormat::Table, dir.path / "x"), UsageError);
  auto tampered = rs;
  tampered[0].parameters += 1;
  CHECK_THROWS_AS(sorted_for_report(tampered), FormatError);
  CHECK(parse_report_format("plotdata") == ReportFormat::PlotData);
  CHECK_THROWS_AS(parse_report_format("pdf"), UsageError);
}

TEST_CASE("run_experiment writes its outputs and is repeatable") {
  TempDir dir("run");
  auto cfg = small_config();
  cfg.output_dir = dir.path;
  const auto a = run_experiment(cfg);
  CHECK(a.parameters == nn::count_params(cfg.spec));
  CHECK(a.test_mse >= 0.0);
  CHECK(fs::exists(dir.path / "tiny.model"));
  CHECK(count_lines(dir.path / "tiny.history.csv") == 2 + 2);
  CHECK(read_records(dir.path / "tiny.records.csv").size() == 1);
  const std::string model = read_all(dir.path / "tiny.model");
  CHECK(model.find("data_seed=4") != std::string::npos);

  const auto b = run_experiment(cfg);
  CHECK(a.test_mse == b.test_mse);
  CHECK(read_all(dir.path / "tiny.model") == model);

  auto bad = cfg;
  bad.train.epochs = 0;
  CHECK_THROWS_AS(run_experiment(bad), UsageError);
}

TEST_CASE("run_experiment reads a dataset file") {
  TempDir dir("dataset");
  const auto g = sampling::build_dataset(ProblemKind::BsPrice, 300, 4);
  sampling::write_dataset(g, dir.path / "d.csv");
  auto cfg = small_config();
  const auto generated = run_experiment(cfg);
  cfg.dataset = dir.path / "d.csv";
  CHECK(run_experiment(cfg).test_mse == generated.test_mse);
  cfg.problem = ProblemKind::ImpliedVol;
  CHECK_THROWS_AS(run_experiment(cfg), UsageError);
}

TEST_CASE("divergence keeps the partial history") {
  TempDir dir("diverge");
  auto cfg = small_config();
  cfg.output_dir = dir.path;
  cfg.spec = nn::default_spec(nn::LayerKind::Dense, 4, 2, 6);
  cfg.spec.activation = Activation::Identity;
  cfg.train.learning_rate = 1e3;
  cfg.train.epochs = 20;
  CHECK_THROWS_AS(run_experiment(cfg), DivergenceError);
  CHECK(fs::exists(dir.path / "tiny.history.csv"));
  CHECK(!fs::exists(dir.path / "tiny.model"));
}

TEST_CASE("run_suite") {
  TempDir dir("suite");
  SuiteOptions o;
  o.n_samples = 200;
  o.test_n = 50;
  o.epochs = 1;
  o.seeds = {1, 2};
  o.output_dir = dir.path;
  std::size_t seen = 0;
  o.on_record = [&](const RunRecord&) { ++seen; };
  const auto rs = run_suite("highway", ProblemKind::BsPrice, o);
  CHECK(rs.size() == 10);
  CHECK(seen == 10);
  CHECK(rs[0].seed == 1);
  CHECK(rs[9].seed == 2);
  CHECK(read_records(dir.path / "highway_bs.records.csv").size() == 10);

  o.output_dir.clear();
  o.seeds = {1};
  const auto again = run_suite("highway", ProblemKind::BsPrice, o);
  for (std::size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].test_mse == rs[i].test_mse);
    CHECK(again[i].parameters == rs[i].parameters);
  }
  CHECK_THROWS_AS(run_suite("nope", ProblemKind::BsPrice, o), UsageError);
  o.seeds.clear();
  CHECK_THROWS_AS(run_suite("highway", ProblemKind::BsPrice, o), UsageError);
}
