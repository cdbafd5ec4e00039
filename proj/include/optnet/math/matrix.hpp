#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace optnet {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles. The shape is fixed at construction;
/// reshaping means assigning a new Mat.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0);
  Mat(std::size_t rows, std::size_t cols, std::vector<double> values);

  static Mat identity(std::size_t n);
  static Mat column(std::span<const double> values);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  void fill(double v);
  bool same_shape(const Mat& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Mat&, const Mat&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Reallocate `m` only when its shape differs from (rows, cols).
void ensure_shape(Mat& m, std::size_t rows, std::size_t cols);

/// y = W x + b.
Vec affine(const Mat& W, std::span<const double> x, std::span<const double> b);

bool all_finite(std::span<const double> v) noexcept;

}  // namespace optnet
