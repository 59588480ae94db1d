#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lagcast/matrix.hpp"
#include "lagcast/stats.hpp"
#include "lagcast/timeseries.hpp"

namespace lagcast::lasso {

// Objective convention used throughout this module:
//
//   F(a, b) = sum_i (y_i - a - sum_j b_j x_ij)^2 + lambda * sum_j |b_j|
//
// i.e. a plain residual sum of squares with no 1/(2n) factor. A penalty
// lambda_glmnet under the common (1/(2n)) RSS + lambda_glmnet |b| convention
// corresponds to lambda = 2 n lambda_glmnet here.

struct LassoConfig {
  /// Penalty weight. When unset, fit_lasso selects it on a chronological
  /// validation split (see select_lambda).
  std::optional<double> lambda;
  /// Converged when the largest coefficient change in a sweep falls below this.
  double tolerance = 1e-7;
  std::size_t max_sweeps = 10000;
  /// Fit on z-scored columns. Coefficients are then reported on that scale.
  bool standardize_features = false;

  /// Throws ConfigError.
  void validate() const;
};

struct LassoFit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  std::vector<std::string> labels;
  double lambda = 0.0;
  /// Sum of |coefficients|, the constraint budget matching this lambda.
  double budget = 0.0;
  std::size_t sweeps_used = 0;
  bool converged = false;
  double objective = 0.0;
  /// Objective before the first sweep followed by its value after each sweep.
  std::vector<double> objective_trace;
  /// Present when the fit used standardized features.
  std::optional<stats::ScalingParams> scaling;

  /// Applies the stored scaling (if any), then a + X b.
  std::vector<double> predict(const DesignMatrix& x) const;
  /// Coefficients and intercept re-expressed on the unscaled feature units.
  std::pair<double, std::vector<double>> original_scale() const;
};

/// sign(z) * max(|z| - t, 0).
double soft_threshold(double z, double t) noexcept;

/// Cyclic coordinate descent from a zero start (or `warm_start`, which must
/// then have one entry per column). The intercept is profiled out by
/// centering. After convergence the active-set system is solved exactly and
/// kept when it preserves signs and optimality and does not raise the objective. Throws InputError on non-finite data or shape mismatch,
/// DegenerateError for a constant column under standardization and
/// InvariantError if the objective ever increases between sweeps.
LassoFit fit_lasso(const DesignMatrix& x, std::span<const double> y, const LassoConfig& cfg,
                   std::span<const double> warm_start = {});

/// Smallest lambda whose solution is identically zero: 2 max_j |x~_j' (y - ybar)|
/// with x~_j the centered (optionally standardized) column.
double lambda_max(const DesignMatrix& x, std::span<const double> y, bool standardize_features = false);

/// F evaluated on the scale the model was fitted on (standardized when the fit
/// carries scaling params).
double objective(const LassoFit& fit, const DesignMatrix& x, std::span<const double> y);

struct LambdaSelection {
  double lambda = 0.0;
  std::vector<double> grid;
  std::vector<double> validation_mse;
  std::size_t fit_rows = 0;
  std::size_t validation_rows = 0;
};

/// Chronological validation: the last 20% of rows are held out, a 50-point
/// log grid from lambda_max (of the leading 80%) down to 1e-4 lambda_max is
/// fitted with warm starts, and the lambda with the lowest validation MSE wins
/// (ties go to the larger lambda). The winner is rescaled by
/// n_total / n_fit because F's penalty is not normalized by row count.
LambdaSelection select_lambda(const DesignMatrix& x, std::span<const double> y, const LassoConfig& cfg);

struct InfluenceWeights {
  std::string target;
  std::vector<std::string> labels;
  std::vector<double> weights;
  LassoFit fit;
  std::optional<LambdaSelection> selection;
};

/// Regresses `target` on every other panel column (in panel order).
InfluenceWeights influence_weights(const AlignedPanel& panel, std::string_view target, const LassoConfig& cfg);

/// {intercept, coefficients: [{label, weight}], lambda, budget, converged,
///  sweeps_used, objective, standardized}
std::string to_json(const LassoFit& fit);
/// "label,weight" rows, six decimals.
std::string weights_csv(std::span<const std::string> labels, std::span<const double> weights);

}  // namespace lagcast::lasso
