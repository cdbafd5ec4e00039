#include "optnet/nn/param_set.hpp"

#include <algorithm>

#include "optnet/math/errors.hpp"

namespace optnet::nn {

void ParamSet::add(std::string name, Mat value) {
  if (index_.contains(name)) throw UsageError("duplicate parameter '" + name + "'");
  index_.emplace(name, names_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

bool ParamSet::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

std::size_t ParamSet::index_of(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) throw UsageError("no parameter named '" + std::string(name) + "'");
  return it->second;
}

Vec ParamSet::flatten() const {
  Vec out;
  out.reserve(scalar_count());
  for (const auto& v : values_) out.insert(out.end(), v.values().begin(), v.values().end());
  return out;
}

void ParamSet::unflatten(std::span<const double> flat) {
  if (flat.size() != scalar_count()) {
    throw DimensionError("unflatten: expected " + std::to_string(scalar_count()) +
                         " values, got " + std::to_string(flat.size()));
  }
  std::size_t pos = 0;
  for (auto& v : values_) {
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(pos), v.size(), v.data());
    pos += v.size();
  }
}

ParamSet ParamSet::zeros_like() const {
  ParamSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    out.add(names_[i], Mat(values_[i].rows(), values_[i].cols()));
  }
  return out;
}

bool ParamSet::same_layout(const ParamSet& other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!values_[i].same_shape(other.values_[i])) return false;
  }
  return true;
}

void ParamSet::fill(double v) {
  for (auto& m : values_) m.fill(v);
}

}  // namespace optnet::nn
