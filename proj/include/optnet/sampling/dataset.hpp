#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "optnet/math/matrix.hpp"
#include "optnet/math/rng.hpp"
#include "optnet/sampling/box.hpp"

namespace optnet::sampling {

/// Latin hypercube draw of n rows over `box`.
///
/// For each dimension (in order) the stream yields a uniform permutation of the
/// n strata, then one uniform offset per row inside its stratum. Every
/// dimension therefore has exactly one point in each of its n equal-width strata.
Mat lhs_sample(std::size_t n, const Box& box, RngStream& rng);

/// Left edge of stratum k of n over [lo, hi]; edge(n) == hi.
double stratum_edge(double lo, double hi, std::size_t n, std::size_t k);

struct SampleGrid {
  ProblemKind problem = ProblemKind::BsPrice;
  std::uint64_t seed = 0;
  Mat inputs;  // n x input_dim(problem)
  Vec labels;
  // Rows replaced by a fresh draw during generation, in increasing order.
  // Not serialized.
  std::vector<std::size_t> resampled_rows;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return inputs.cols(); }
  SampleGrid subset(const std::vector<std::size_t>& rows) const;
};

/// Same problem, seed, inputs and labels (bitwise).
bool same_content(const SampleGrid& a, const SampleGrid& b);

/// Generation-time threshold: implied-volatility rows whose price is within
/// this distance of intrinsic value are ill-posed and get resampled.
inline constexpr double kIllPosedTimeValue = 1e-12;

/// LHS draw of `n` rows for `kind` with ground-truth labels.
///
/// The implied-volatility problems reuse the Black-Scholes draw of the same
/// seed and swap the roles of sigma and the price. Rows that fail to price, or
/// that are ill-posed for inversion, are replaced by uniform draws from a
/// stream derived from the seed; their indices are kept in resampled_rows.
SampleGrid build_dataset(ProblemKind kind, std::size_t n, std::uint64_t seed);

struct DataSplit {
  SampleGrid train;
  SampleGrid validation;
  SampleGrid test;
};

/// Shuffled train/validation partition of `g`, plus an independent test grid of
/// `test_n` rows drawn with derive_seed(g.seed, "test").
DataSplit split_dataset(const SampleGrid& g, double train_frac, std::size_t test_n,
                        std::uint64_t seed);

/// Text format: "# problem=<kind> seed=<u64> n=<int>", a header of column
/// names (inputs then "label"), then n comma-separated rows in %.17g.
void write_dataset(const SampleGrid& g, std::ostream& out);
void write_dataset(const SampleGrid& g, const std::filesystem::path& path);
SampleGrid read_dataset(std::istream& in);
SampleGrid read_dataset(const std::filesystem::path& path);

}  // namespace optnet::sampling
