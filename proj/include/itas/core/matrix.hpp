#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace itas {

// Dense row-major matrix of doubles. Rows are frames (or batch items) and
// columns are channels throughout the library.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() noexcept { return data_; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& storage() const noexcept { return data_; }

  void fill(double value);
  bool all_finite() const;
  std::string shape_string() const;

  // Appends `extra` zero columns, keeping existing entries in place.
  void append_cols(std::size_t extra);

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// a·b
Matrix matmul(const Matrix& a, const Matrix& b);
// out += aᵀ·b
void add_matmul_tn(Matrix& out, const Matrix& a, const Matrix& b);
// a·bᵀ
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Column-wise concatenation of matrices with equal row counts.
Matrix hconcat(std::initializer_list<const Matrix*> parts);
// Columns [begin, begin + count).
Matrix slice_cols(const Matrix& m, std::size_t begin, std::size_t count);

double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace itas
