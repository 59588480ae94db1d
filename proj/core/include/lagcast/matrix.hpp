#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lagcast/date.hpp"

namespace lagcast {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);
  /// Builds from row vectors; all rows must share a length.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;
  void set_column(std::size_t c, std::span<const double> values);

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  Matrix transpose() const;
  /// Rows [first, first + count).
  Matrix row_block(std::size_t first, std::size_t count) const;
  /// Columns [0, count).
  Matrix leading_columns(std::size_t count) const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

double dot(std::span<const double> a, std::span<const double> b) noexcept;
double mean(std::span<const double> v) noexcept;

/// A labeled numeric table: features, optional target, optional row dates.
///
/// `target` and `dates` are either empty or have one entry per row.
struct DesignMatrix {
  Matrix values;
  std::vector<std::string> labels;
  std::vector<Date> dates;
  std::vector<double> target;

  std::size_t rows() const noexcept { return values.rows(); }
  std::size_t cols() const noexcept { return values.cols(); }

  /// Throws InputError when labels/dates/target lengths disagree with `values`.
  void check_shape() const;
  /// Rows [first, first + count), carrying dates and target along.
  DesignMatrix row_block(std::size_t first, std::size_t count) const;
};

}  // namespace lagcast
