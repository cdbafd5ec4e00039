#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "doctest.h"
#include "optnet/harness/experiment.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / ("optnet_cli_" + std::to_string(::getpid()));

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Result run(const std::string& args) {
  fs::create_directories(kWork);
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = "cd '" + kWork.string() + "' && '" OPTNET_CLI "' " + args + " >'" +
                          out.string() + "' 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

struct Cleanup {
  ~Cleanup() { fs::remove_all(kWork); }
} cleanup;

}  // namespace

TEST_CASE("generate is byte-identical for a fixed seed") {
  REQUIRE(run("generate --problem bs --n 100 --seed 7 --out a.csv").code == 0);
  REQUIRE(run("generate --problem bs --n 100 --seed 7 --out b.csv").code == 0);
  const std::string a = slurp(kWork / "a.csv");
  CHECK(a == slurp(kWork / "b.csv"));
  CHECK(a.starts_with("# problem=bs seed=7 n=100\n"));
  REQUIRE(run("generate --problem bs --n 100 --seed 8 --out c.csv").code == 0);
  CHECK(a != slurp(kWork / "c.csv"));
}

TEST_CASE("bad flags print usage and fail") {
  for (const char* args : {"", "generate --problem bs", "frobnicate", "oracle --check nope",
                           "suite --name mlp12 --problem bs --scale huge",
                           "suite --name nope --problem bs", "generate --problem xyz --n 5 --out -",
                           "train --config /nonexistent.cfg"}) {
    const auto r = run(args);
    INFO(args);
    CHECK(r.code != 0);
    CHECK((r.err.find("Usage") != std::string::npos || r.err.find("usage") != std::string::npos ||
           r.err.find("OPTIONS") != std::string::npos));
  }
}

TEST_CASE("oracle checks") {
  const auto grad = run("oracle --check grad");
  CHECK(grad.code == 0);
  CHECK(grad.out.find("PASS oracle grad") != std::string::npos);
  const auto params = run("oracle --check params");
  CHECK(params.code == 0);
  CHECK(params.out.find("published 33459, difference +158") != std::string::npos);
  CHECK(run("oracle --check bs --check iv --points 2000").code == 0);
}

TEST_CASE("train then evaluate") {
  {
    std::ofstream cfg(kWork / "run.cfg");
    cfg << "name=cli\nproblem=tiv\nkind=genhighway\nlayers=2\nnodes=5\nepochs=2\n"
           "learning_rate=0.001\nn_samples=300\ntest_n=100\ndata_seed=3\n";
  }
  const auto t = run("train --config run.cfg --output-dir out --quiet");
  REQUIRE(t.code == 0);
  CHECK(t.out.find("cli,tiv,genhighway,2,5,1,") != std::string::npos);
  REQUIRE(fs::exists(kWork / "out" / "cli.model"));
  REQUIRE(run("generate --problem tiv --n 50 --seed 9 --out tiv.csv").code == 0);
  const auto e = run("evaluate --model out/cli.model --dataset tiv.csv");
  CHECK(e.code == 0);
  CHECK(e.out.starts_with("mse="));
  REQUIRE(run("generate --problem heston --n 5 --seed 9 --out h.csv").code == 0);
  CHECK(run("evaluate --model out/cli.model --dataset h.csv").code != 0);
}

TEST_CASE("suite and report") {
  const auto s = run(
      "suite --name mlp12 --problem bs --scale desk --n-samples 200 --test-n 50 --epochs 1 "
      "--out res");
  REQUIRE(s.code == 0);
  const auto records = optnet::harness::read_records(kWork / "res" / "mlp12_bs.records.csv");
  CHECK(records.size() == 12);
  CHECK(fs::exists(kWork / "res" / "mlp12_bs_table.txt"));
  CHECK(fs::exists(kWork / "res" / "mlp12_bs_table.csv"));

  const auto r = run("report --in res/mlp12_bs.records.csv --format plotdata --out plots/mlp");
  CHECK(r.code == 0);
  CHECK(fs::exists(kWork / "plots" / "mlp_mse.dat"));
  CHECK(fs::exists(kWork / "plots" / "mlp_time.dat"));
  CHECK(run("report --in res/mlp12_bs.records.csv --format pdf").code != 0);
}
