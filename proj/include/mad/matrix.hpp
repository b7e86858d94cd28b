#pragma once

#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace mad {

// Dense row-major matrix of doubles.
//
// The product kernels accumulate every output element over the inner
// dimension in a fixed ascending order, so a row of a product depends only on
// the matching row of the left operand. Batched and one-at-a-time evaluation
// therefore agree bitwise.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    assert(r < rows_ && c < cols_);
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  void fill(double v);
  bool same_shape(const Matrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Every output element starts from its current value (or 0) and adds the
// products over the inner index in ascending order, so each output row depends
// only on the matching row of the left operand.

// out (+)= a * b
void matmul(const Matrix& a, const Matrix& b, Matrix& out,
            bool accumulate = false);
// out (+)= a^T * b
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out,
               bool accumulate = false);
// out (+)= a * b^T
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out,
               bool accumulate = false);

}  // namespace mad
