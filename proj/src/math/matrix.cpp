#include "optnet/math/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "optnet/math/errors.hpp"

namespace optnet {

Mat::Mat(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Mat::Mat(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
  if (data_.size() != rows * cols) {
    throw DimensionError("Mat: " + std::to_string(data_.size()) + " values for a " +
                         std::to_string(rows) + "x" + std::to_string(cols) + " matrix");
  }
}

Mat Mat::identity(std::size_t n) {
  Mat m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::column(std::span<const double> values) {
  return Mat(values.size(), 1, std::vector<double>(values.begin(), values.end()));
}

void Mat::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void ensure_shape(Mat& m, std::size_t rows, std::size_t cols) {
  if (m.rows() != rows || m.cols() != cols) m = Mat(rows, cols);
}

Vec affine(const Mat& W, std::span<const double> x, std::span<const double> b) {
  if (W.cols() != x.size() || W.rows() != b.size()) {
    throw DimensionError("affine: W is " + std::to_string(W.rows()) + "x" +
                         std::to_string(W.cols()) + ", x has " + std::to_string(x.size()) +
                         ", b has " + std::to_string(b.size()));
  }
  Vec y(b.begin(), b.end());
  for (std::size_t i = 0; i < W.rows(); ++i) {
    const auto w = W.row(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += w[j] * x[j];
    y[i] += acc;
  }
  return y;
}

bool all_finite(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double a) { return std::isfinite(a); });
}

}  // namespace optnet
