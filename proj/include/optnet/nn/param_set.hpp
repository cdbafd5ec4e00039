#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "optnet/math/matrix.hpp"

namespace optnet::nn {

/// Ordered collection of named matrices. Biases are (n x 1) columns.
class ParamSet {
 public:
  /// Appends a parameter; throws UsageError on a duplicate name.
  void add(std::string name, Mat value);

  std::size_t size() const noexcept { return values_.size(); }
  std::size_t scalar_count() const noexcept;

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;  // throws UsageError if absent

  const std::string& name(std::size_t i) const { return names_[i]; }
  Mat& at(std::size_t i) { return values_[i]; }
  const Mat& at(std::size_t i) const { return values_[i]; }
  Mat& operator[](std::string_view name) { return values_[index_of(name)]; }
  const Mat& operator[](std::string_view name) const { return values_[index_of(name)]; }

  /// All values, parameter by parameter in order, each row-major.
  Vec flatten() const;
  /// Inverse of flatten; throws DimensionError on a length mismatch.
  void unflatten(std::span<const double> flat);

  /// Same names and shapes, all zero.
  ParamSet zeros_like() const;
  bool same_layout(const ParamSet& other) const;
  void fill(double v);

  friend bool operator==(const ParamSet& a, const ParamSet& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Mat> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace optnet::nn
