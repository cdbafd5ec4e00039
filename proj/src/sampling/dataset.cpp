#include "optnet/sampling/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <optional>
#include <string>

#include "optnet/math/errors.hpp"
#include "optnet/math/parallel.hpp"
#include "optnet/pricing/black_scholes.hpp"
#include "optnet/pricing/heston.hpp"
#include "optnet/util/text.hpp"

namespace optnet::sampling {

double stratum_edge(double lo, double hi, std::size_t n, std::size_t k) {
  if (k >= n) return hi;
  return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n);
}

Mat lhs_sample(std::size_t n, const Box& box, RngStream& rng) {
  if (n == 0) throw DimensionError("lhs_sample: n must be >= 1");
  Mat out(n, box.dim());
  std::vector<std::size_t> strata(n);
  for (std::size_t j = 0; j < box.dim(); ++j) {
    const auto& d = box[j];
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(strata));
    for (std::size_t i = 0; i < n; ++i) {
      const double left = stratum_edge(d.lo, d.hi, n, strata[i]);
      const double right = stratum_edge(d.lo, d.hi, n, strata[i] + 1);
      double x = left + rng.uniform() * (right - left);
      if (x >= right) x = std::nextafter(right, left);
      out(i, j) = x;
    }
  }
  return out;
}

SampleGrid SampleGrid::subset(const std::vector<std::size_t>& rows) const {
  SampleGrid g;
  g.problem = problem;
  g.seed = seed;
  g.inputs = Mat(rows.size(), dim());
  g.labels.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = inputs.row(rows[i]);
    std::copy(src.begin(), src.end(), g.inputs.row(i).begin());
    g.labels[i] = labels[rows[i]];
  }
  return g;
}

bool same_content(const SampleGrid& a, const SampleGrid& b) {
  return a.problem == b.problem && a.seed == b.seed && a.inputs == b.inputs &&
         a.labels == b.labels;
}

namespace {

bool is_iv_problem(ProblemKind kind) {
  return kind == ProblemKind::ImpliedVol || kind == ProblemKind::TransformedImpliedVol;
}

pricing::HestonParams heston_from_row(const double* x) {
  return {x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7]};
}

// Price label of one generation row; nullopt marks a row to resample.
std::optional<double> price_row(ProblemKind kind, const double* x) {
  try {
    if (kind == ProblemKind::HestonPrice) return pricing::heston_cos_call(heston_from_row(x));
    const double price = pricing::bs_scaled_call({x[0], x[1], x[2], x[3]});
    if (is_iv_problem(kind) &&
        price - pricing::intrinsic_scaled(x[0], x[1], x[2]) <= kIllPosedTimeValue) {
      return std::nullopt;
    }
    return price;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace

SampleGrid build_dataset(ProblemKind kind, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DimensionError("build_dataset: n must be >= 1");
  const Box box = generation_box(kind);
  RngStream rng(seed);
  Mat raw = lhs_sample(n, box, rng);

  std::vector<double> prices(n);
  std::vector<char> ok(n, 0);
  parallel_for(n, [&](std::size_t i) {
    if (auto p = price_row(kind, raw.row(i).data())) {
      prices[i] = *p;
      ok[i] = 1;
    }
  });

  SampleGrid g;
  g.problem = kind;
  g.seed = seed;
  RngStream resample(derive_seed(seed, "resample"));
  for (std::size_t i = 0; i < n; ++i) {
    if (ok[i]) continue;
    g.resampled_rows.push_back(i);
    auto row = raw.row(i);
    while (true) {
      for (std::size_t j = 0; j < box.dim(); ++j) {
        row[j] = box[j].lo + resample.uniform() * (box[j].hi - box[j].lo);
      }
      if (auto p = price_row(kind, row.data())) {
        prices[i] = *p;
        break;
      }
    }
  }

  g.inputs = Mat(n, input_dim(kind));
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto src = raw.row(i);
    auto dst = g.inputs.row(i);
    switch (kind) {
      case ProblemKind::BsPrice:
      case ProblemKind::HestonPrice:
        std::copy(src.begin(), src.end(), dst.begin());
        g.labels[i] = prices[i];
        break;
      case ProblemKind::ImpliedVol:
      case ProblemKind::TransformedImpliedVol:
        std::copy(src.begin(), src.begin() + 3, dst.begin());
        dst[3] = kind == ProblemKind::ImpliedVol
                     ? prices[i]
                     : pricing::time_value_forward(prices[i], src[0], src[1], src[2]);
        g.labels[i] = src[3];
        break;
    }
  }
  return g;
}

DataSplit split_dataset(const SampleGrid& g, double train_frac, std::size_t test_n,
                        std::uint64_t seed) {
  if (!(train_frac > 0.0 && train_frac < 1.0)) {
    throw DimensionError("split_dataset: train_frac must lie in (0, 1)");
  }
  if (test_n == 0) throw DimensionError("split_dataset: test_n must be >= 1");
  std::vector<std::size_t> idx(g.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  RngStream rng(seed);
  rng.shuffle(std::span<std::size_t>(idx));
  const auto n_train = static_cast<std::size_t>(
      std::llround(train_frac * static_cast<double>(g.size())));
  const std::vector<std::size_t> train_rows(idx.begin(), idx.begin() + n_train);
  const std::vector<std::size_t> val_rows(idx.begin() + n_train, idx.end());
  return {g.subset(train_rows), g.subset(val_rows),
          build_dataset(g.problem, test_n, derive_seed(g.seed, "test"))};
}

void write_dataset(const SampleGrid& g, std::ostream& out) {
  out << "# problem=" << to_string(g.problem) << " seed=" << g.seed << " n=" << g.size()
      << '\n';
  for (const auto& name : input_box(g.problem).names()) out << name << ',';
  out << "label\n";
  std::string line;
  for (std::size_t i = 0; i < g.size(); ++i) {
    line.clear();
    for (double v : g.inputs.row(i)) {
      line += text::format_double(v);
      line += ',';
    }
    line += text::format_double(g.labels[i]);
    line += '\n';
    out << line;
  }
}

void write_dataset(const SampleGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot open '" + path.string() + "' for writing");
  write_dataset(g, out);
  if (!out) throw FormatError("write failed for '" + path.string() + "'");
}

SampleGrid read_dataset(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || !line.starts_with("# ")) {
    throw FormatError("dataset: missing '# problem=... seed=... n=...' line");
  }
  SampleGrid g;
  try {
    g.problem = parse_problem(text::header_value(line, "problem"));
  } catch (const UsageError& e) {
    throw FormatError(std::string("dataset: ") + e.what());
  }
  g.seed = text::parse_u64(text::header_value(line, "seed"));
  const auto n = static_cast<std::size_t>(text::parse_u64(text::header_value(line, "n")));

  const auto names = input_box(g.problem).names();
  if (!std::getline(in, line)) throw FormatError("dataset: missing column header");
  const auto columns = text::split(text::trim(line), ',');
  if (columns.size() != names.size() + 1 || columns.back() != "label") {
    throw FormatError("dataset: column header does not match problem '" +
                      std::string(to_string(g.problem)) + "'");
  }
  for (std::size_t j = 0; j < names.size(); ++j) {
    if (columns[j] != names[j]) throw FormatError("dataset: unexpected column '" +
                                                  std::string(columns[j]) + "'");
  }

  const std::size_t d = names.size();
  g.inputs = Mat(n, d);
  g.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) {
      throw FormatError("dataset: expected " + std::to_string(n) + " rows, found " +
                        std::to_string(i));
    }
    const auto fields = text::split(text::trim(line), ',');
    if (fields.size() != d + 1) {
      throw FormatError("dataset: row " + std::to_string(i) + " has " +
                        std::to_string(fields.size()) + " fields");
    }
    for (std::size_t j = 0; j < d; ++j) g.inputs(i, j) = text::parse_double(fields[j]);
    g.labels[i] = text::parse_double(fields[d]);
  }
  while (std::getline(in, line)) {
    if (!text::trim(line).empty()) throw FormatError("dataset: more rows than n");
  }
  return g;
}

SampleGrid read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open '" + path.string() + "'");
  return read_dataset(in);
}

}  // namespace optnet::sampling
