#include "lagcast/stats.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "lagcast/error.hpp"
#include "lagcast/io.hpp"
#include "svg.hpp"

namespace lagcast::stats {
namespace {

bool is_constant(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

}  // namespace

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) throw InputError(fmt::format("variance needs at least 2 values, got {}", v.size()));
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

double sample_sd(std::span<const double> v) { return std::sqrt(sample_variance(v)); }

std::pair<DesignMatrix, ScalingParams> standardize(const DesignMatrix& matrix) {
  matrix.check_shape();
  ScalingParams params;
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    const auto col = matrix.values.column(c);
    const double sd = sample_sd(col);
    if (is_constant(col) || !(sd > 0.0) || !std::isfinite(sd))
      throw DegenerateError(fmt::format("column '{}' has zero variance and cannot be standardized", matrix.labels[c]));
    params.means.push_back(mean(col));
    params.sds.push_back(sd);
  }
  return {apply_scaling(matrix, params), params};
}

DesignMatrix apply_scaling(const DesignMatrix& matrix, const ScalingParams& params) {
  if (params.means.size() != matrix.cols()) throw InputError("scaling parameters do not match the column count");
  DesignMatrix out = matrix;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out.values(r, c) = (out.values(r, c) - params.means[c]) / params.sds[c];
  return out;
}

DesignMatrix invert_scaling(const DesignMatrix& matrix, const ScalingParams& params) {
  if (params.means.size() != matrix.cols()) throw InputError("scaling parameters do not match the column count");
  DesignMatrix out = matrix;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out.values(r, c) = out.values(r, c) * params.sds[c] + params.means[c];
  return out;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InputError(fmt::format("pearson: length mismatch {} vs {}", x.size(), y.size()));
  if (x.size() < 2) throw InputError("pearson: need at least 2 observations");
  if (is_constant(x)) throw DegenerateError("pearson: first input is constant");
  if (is_constant(y)) throw DegenerateError("pearson: second input is constant");
  const double mx = mean(x), my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

CorrMatrix correlation_matrix(const AlignedPanel& panel) {
  panel.validate();
  if (panel.cols() < 2) throw InputError("correlation matrix needs at least 2 columns");
  const std::size_t n = panel.cols();
  CorrMatrix out{panel.labels, Matrix(n, n)};
  for (std::size_t i = 0; i < n; ++i) {
    if (is_constant(panel.columns[i]))
      throw DegenerateError(fmt::format("column '{}' is constant; correlation undefined", panel.labels[i]));
    out.values(i, i) = 1.0;
    for (std::size_t j = 0; j < i; ++j) {
      const double r = pearson(panel.columns[i], panel.columns[j]);
      out.values(i, j) = r;
      out.values(j, i) = r;
    }
  }
  return out;
}

std::string to_csv(const CorrMatrix& corr) {
  std::string out;
  for (const auto& l : corr.labels) out += "," + l;
  out += '\n';
  for (std::size_t i = 0; i < corr.labels.size(); ++i) {
    out += corr.labels[i];
    for (std::size_t j = 0; j < corr.labels.size(); ++j) out += "," + io::fixed6(corr.values(i, j));
    out += '\n';
  }
  return out;
}

std::string to_svg(const CorrMatrix& corr, const std::string& title) {
  const std::size_t n = corr.labels.size();
  constexpr int cell = 70, left = 130, top = 60;
  const int width = left + static_cast<int>(n) * cell + 20;
  const int height = top + static_cast<int>(n) * cell + 110;
  svg::Document doc(width, height);
  doc.text(width / 2.0, 30, title, 16, "middle");
  for (std::size_t i = 0; i < n; ++i) {
    const double y = top + static_cast<double>(i) * cell;
    doc.text(left - 8, y + cell / 2.0 + 4, corr.labels[i], 12, "end");
    for (std::size_t j = 0; j < n; ++j) {
      const double x = left + static_cast<double>(j) * cell;
      const double v = corr.values(i, j);
      doc.rect(x, y, cell, cell, svg::diverging_color(v), "#ffffff");
      doc.text(x + cell / 2.0, y + cell / 2.0 + 4, fmt::format("{:.2f}", v), 12, "middle",
               std::abs(v) > 0.6 ? "#ffffff" : "#000000");
    }
  }
  for (std::size_t j = 0; j < n; ++j)
    doc.text(left + (static_cast<double>(j) + 0.5) * cell, top + static_cast<double>(n) * cell + 18, corr.labels[j], 12, "middle");

  // Color bar over [-1, 1].
  const double bar_y = top + static_cast<double>(n) * cell + 40;
  const double bar_w = static_cast<double>(n) * cell;
  constexpr int steps = 40;
  for (int s = 0; s < steps; ++s) {
    const double v = -1.0 + 2.0 * (s + 0.5) / steps;
    doc.rect(left + bar_w * s / steps, bar_y, bar_w / steps + 0.5, 14, svg::diverging_color(v), "");
  }
  doc.text(left, bar_y + 30, "-1", 11, "middle");
  doc.text(left + bar_w / 2, bar_y + 30, "0", 11, "middle");
  doc.text(left + bar_w, bar_y + 30, "1", 11, "middle");
  return doc.str();
}

}  // namespace lagcast::stats
