#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lagcast/matrix.hpp"
#include "lagcast/timeseries.hpp"

namespace lagcast::stats {

/// Per-column location and scale. Standard deviations use the n-1 denominator.
struct ScalingParams {
  std::vector<double> means;
  std::vector<double> sds;
};

double sample_variance(std::span<const double> v);
double sample_sd(std::span<const double> v);

/// Column-wise z-scores (mean 0, sample sd 1). Dates, target and labels are
/// carried through unchanged. Throws DegenerateError naming the first
/// constant column.
std::pair<DesignMatrix, ScalingParams> standardize(const DesignMatrix& matrix);
/// Applies stored parameters to new rows (e.g. a test partition).
DesignMatrix apply_scaling(const DesignMatrix& matrix, const ScalingParams& params);
/// Exact inverse of apply_scaling.
DesignMatrix invert_scaling(const DesignMatrix& matrix, const ScalingParams& params);

/// Sample Pearson correlation, clamped to [-1, 1]. Throws InputError for
/// mismatched or too-short inputs and DegenerateError for a constant input.
double pearson(std::span<const double> x, std::span<const double> y);

struct CorrMatrix {
  std::vector<std::string> labels;
  Matrix values;
};

/// Pairwise Pearson matrix with an exact unit diagonal and mirrored halves.
CorrMatrix correlation_matrix(const AlignedPanel& panel);

/// Header ",<labels>" then one row per label; six-decimal values.
std::string to_csv(const CorrMatrix& corr);
/// Heat map: cells colored on a linear blue-white-red ramp over [-1, 1] and
/// labeled with two-decimal values.
std::string to_svg(const CorrMatrix& corr, const std::string& title = "Correlation heat map");

}  // namespace lagcast::stats
