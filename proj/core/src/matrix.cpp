#include "lagcast/matrix.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "lagcast/error.hpp"

namespace lagcast {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != m.cols()) throw InputError("ragged rows in matrix literal");
    std::copy(rows[r].begin(), rows[r].end(), m.row(r).begin());
  }
  return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

void Matrix::set_column(std::size_t c, std::span<const double> values) {
  for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix Matrix::row_block(std::size_t first, std::size_t count) const {
  Matrix out(count, cols_);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * cols_), count * cols_, out.data_.begin());
  return out;
}

Matrix Matrix::leading_columns(std::size_t count) const {
  Matrix out(rows_, count);
  for (std::size_t r = 0; r < rows_; ++r) std::copy_n(row(r).begin(), count, out.row(r).begin());
  return out;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows())
    throw InputError(fmt::format("matrix product shape mismatch: {}x{} * {}x{}", a.rows(), a.cols(), b.rows(), b.cols()));
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto orow = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) orow[j] += aik * brow[j];
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double mean(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

void DesignMatrix::check_shape() const {
  if (labels.size() != values.cols())
    throw InputError(fmt::format("design matrix has {} columns but {} labels", values.cols(), labels.size()));
  if (!dates.empty() && dates.size() != values.rows())
    throw InputError(fmt::format("design matrix has {} rows but {} dates", values.rows(), dates.size()));
  if (!target.empty() && target.size() != values.rows())
    throw InputError(fmt::format("design matrix has {} rows but target length {}", values.rows(), target.size()));
}

DesignMatrix DesignMatrix::row_block(std::size_t first, std::size_t count) const {
  DesignMatrix out;
  out.values = values.row_block(first, count);
  out.labels = labels;
  if (!dates.empty()) out.dates.assign(dates.begin() + first, dates.begin() + first + count);
  if (!target.empty()) out.target.assign(target.begin() + first, target.begin() + first + count);
  return out;
}

}  // namespace lagcast
