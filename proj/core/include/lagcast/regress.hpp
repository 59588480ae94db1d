#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lagcast/matrix.hpp"

namespace lagcast::regress {

struct OlsFit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<std::string> labels;
};

/// Least squares with an intercept, solved by Householder QR of [1 | X].
/// Throws InputError if rows < cols + 1 or values are non-finite, and
/// RankError naming the first column whose R diagonal falls below 1e-10 times
/// the largest one.
OlsFit fit_ols(const DesignMatrix& x, std::span<const double> y);

/// a + X b. Throws InputError unless x carries exactly the fit's labels.
std::vector<double> predict(const OlsFit& fit, const DesignMatrix& x);

struct MetricsReport {
  double mse = 0.0;
  double rmse = 0.0;
  double mae = 0.0;
  /// 1 - SS_res / SS_tot; empty only when requested for a constant target
  /// with require_r2 = false.
  std::optional<double> r2;
};

/// Throws InputError on length mismatch or fewer than two values. A constant
/// `actual` makes r2 undefined: DegenerateError when require_r2, otherwise r2
/// is left empty.
MetricsReport metrics(std::span<const double> actual, std::span<const double> predicted, bool require_r2 = true);

/// {intercept, coefficients: [{label, weight}]}
std::string to_json(const OlsFit& fit);
/// {mse, rmse, mae, r2}
std::string to_json(const MetricsReport& report);
/// "date,actual,predicted" with six decimals.
std::string predictions_csv(std::span<const Date> dates, std::span<const double> actual, std::span<const double> predicted);

}  // namespace lagcast::regress
