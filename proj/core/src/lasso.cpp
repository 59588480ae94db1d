#include "lagcast/lasso.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json_util.hpp"
#include "lagcast/error.hpp"
#include "lagcast/io.hpp"

namespace lagcast::lasso {
namespace {

// Design on the fitting scale, centered, stored column-major for the sweeps.
struct Centered {
  std::vector<std::vector<double>> columns;
  std::vector<double> column_means;  // means on the fitting scale, before centering
  std::vector<double> norms;         // x~_j' x~_j
  std::vector<double> y;
  double y_mean = 0.0;
  std::optional<stats::ScalingParams> scaling;
};

void check_inputs(const DesignMatrix& x, std::span<const double> y) {
  x.check_shape();
  if (x.rows() != y.size()) throw InputError(fmt::format("design has {} rows but target has {}", x.rows(), y.size()));
  if (x.rows() < 2) throw InputError("LASSO needs at least 2 rows");
  for (double v : x.values.data())
    if (!std::isfinite(v)) throw InputError("design matrix contains a non-finite value");
  for (double v : y)
    if (!std::isfinite(v)) throw InputError("target contains a non-finite value");
}

Centered center(const DesignMatrix& x, std::span<const double> y, bool standardize) {
  check_inputs(x, y);
  Centered c;
  const DesignMatrix* fit_scale = &x;
  DesignMatrix scaled;
  if (standardize) {
    auto [z, params] = stats::standardize(x);
    scaled = std::move(z);
    c.scaling = std::move(params);
    fit_scale = &scaled;
  }
  const std::size_t n = x.rows(), p = x.cols();
  c.columns.resize(p);
  c.column_means.resize(p);
  c.norms.resize(p);
  for (std::size_t j = 0; j < p; ++j) {
    auto col = fit_scale->values.column(j);
    const double m = mean(col);
    for (double& v : col) v -= m;
    c.column_means[j] = m;
    c.norms[j] = dot(col, col);
    c.columns[j] = std::move(col);
  }
  c.y_mean = mean(y);
  c.y.resize(n);
  for (std::size_t i = 0; i < n; ++i) c.y[i] = y[i] - c.y_mean;
  return c;
}

double penalized(std::span<const double> residual, std::span<const double> beta, double lambda) {
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return dot(residual, residual) + lambda * l1;
}

// Once the active set and signs have settled, the optimum on that face solves
// G_A b = X~_A' y~ - (lambda/2) s_A exactly. Accepts the solution only if signs
// are kept, inactive coordinates stay optimal and the objective does not rise.
bool polish(const Centered& c, double lambda, std::vector<double>& beta, std::vector<double>& r, double current) {
  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < beta.size(); ++j)
    if (beta[j] != 0.0) active.push_back(j);
  const std::size_t m = active.size(), n = c.y.size();
  if (m == 0) return false;

  Matrix l(m, m);
  std::vector<double> rhs(m);
  for (std::size_t a = 0; a < m; ++a) {
    const auto& xa = c.columns[active[a]];
    rhs[a] = dot(xa, c.y) - 0.5 * lambda * (beta[active[a]] > 0 ? 1.0 : -1.0);
    for (std::size_t b = 0; b <= a; ++b) l(a, b) = dot(xa, c.columns[active[b]]);
  }
  for (std::size_t a = 0; a < m; ++a) {
    const double diag = l(a, a);
    for (std::size_t b = 0; b <= a; ++b) {
      double s = l(a, b);
      for (std::size_t k = 0; k < b; ++k) s -= l(a, k) * l(b, k);
      if (a == b) {
        if (!(s > 1e-10 * diag)) return false;
        l(a, a) = std::sqrt(s);
      } else {
        l(a, b) = s / l(b, b);
      }
    }
  }
  std::vector<double> z(m);
  for (std::size_t a = 0; a < m; ++a) {
    double s = rhs[a];
    for (std::size_t k = 0; k < a; ++k) s -= l(a, k) * z[k];
    z[a] = s / l(a, a);
  }
  for (std::size_t a = m; a-- > 0;) {
    double s = z[a];
    for (std::size_t k = a + 1; k < m; ++k) s -= l(k, a) * z[k];
    z[a] = s / l(a, a);
  }

  std::vector<double> next = beta;
  for (std::size_t a = 0; a < m; ++a) {
    if ((z[a] > 0) != (beta[active[a]] > 0) || z[a] == 0.0) return false;
    next[active[a]] = z[a];
  }
  std::vector<double> res = c.y;
  for (std::size_t j : active)
    for (std::size_t i = 0; i < n; ++i) res[i] -= c.columns[j][i] * next[j];
  for (std::size_t j = 0; j < beta.size(); ++j)
    if (next[j] == 0.0 && std::abs(2.0 * dot(c.columns[j], res)) > lambda) return false;
  if (penalized(res, next, lambda) > current) return false;
  beta = std::move(next);
  r = std::move(res);
  return true;
}

LassoFit solve(const Centered& c, const std::vector<std::string>& labels, double lambda, const LassoConfig& cfg,
               std::span<const double> warm_start, bool refine) {
  const std::size_t p = c.columns.size(), n = c.y.size();
  std::vector<double> beta(p, 0.0);
  if (!warm_start.empty()) {
    if (warm_start.size() != p) throw InputError("warm start length does not match the column count");
    std::copy(warm_start.begin(), warm_start.end(), beta.begin());
  }
  std::vector<double> r = c.y;
  for (std::size_t j = 0; j < p; ++j)
    if (beta[j] != 0.0)
      for (std::size_t i = 0; i < n; ++i) r[i] -= c.columns[j][i] * beta[j];

  LassoFit fit;
  fit.labels = labels;
  fit.lambda = lambda;
  fit.scaling = c.scaling;
  fit.objective_trace.push_back(penalized(r, beta, lambda));
  // Allowed round-off growth of the objective between sweeps.
  const double slack = 1e-10 * std::max(fit.objective_trace.front(), dot(c.y, c.y)) + 1e-300;

  for (std::size_t sweep = 0; sweep < cfg.max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      if (c.norms[j] == 0.0) continue;
      const auto& xj = c.columns[j];
      // x~_j' r_{-j}, with r_{-j} the residual excluding coordinate j.
      const double rho = dot(xj, r) + c.norms[j] * beta[j];
      const double updated = soft_threshold(2.0 * rho, lambda) / (2.0 * c.norms[j]);
      const double delta = updated - beta[j];
      if (delta != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= xj[i] * delta;
        beta[j] = updated;
      }
      max_change = std::max(max_change, std::abs(delta));
    }
    fit.sweeps_used = sweep + 1;
    const double obj = penalized(r, beta, lambda);
    if (obj > fit.objective_trace.back() + slack)
      throw InvariantError(fmt::format("LASSO objective increased from {} to {} in sweep {}", fit.objective_trace.back(), obj,
                                       sweep + 1));
    fit.objective_trace.push_back(obj);
    if (max_change < cfg.tolerance) {
      fit.converged = true;
      break;
    }
  }

  if (refine && fit.converged && polish(c, lambda, beta, r, fit.objective_trace.back()))
    fit.objective_trace.push_back(penalized(r, beta, lambda));

  fit.coefficients = beta;
  fit.objective = fit.objective_trace.back();
  fit.budget = 0.0;
  for (double b : beta) fit.budget += std::abs(b);
  fit.intercept = c.y_mean;
  for (std::size_t j = 0; j < p; ++j) fit.intercept -= beta[j] * c.column_means[j];
  if (!std::isfinite(fit.objective)) throw InvariantError("LASSO objective is not finite");
  return fit;
}

}  // namespace

void LassoConfig::validate() const {
  if (lambda && !(*lambda >= 0.0 && std::isfinite(*lambda)))
    throw ConfigError(fmt::format("lambda must be finite and >= 0 (got {})", *lambda));
  if (!(tolerance > 0.0)) throw ConfigError(fmt::format("tolerance must be > 0 (got {})", tolerance));
  if (max_sweeps < 1) throw ConfigError("max_sweeps must be >= 1");
}

double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

LassoFit fit_lasso(const DesignMatrix& x, std::span<const double> y, const LassoConfig& cfg,
                   std::span<const double> warm_start) {
  cfg.validate();
  double lambda = 0.0;
  if (cfg.lambda) lambda = *cfg.lambda;
  else lambda = select_lambda(x, y, cfg).lambda;
  const auto c = center(x, y, cfg.standardize_features);
  return solve(c, x.labels, lambda, cfg, warm_start, true);
}

double lambda_max(const DesignMatrix& x, std::span<const double> y, bool standardize_features) {
  const auto c = center(x, y, standardize_features);
  double best = 0.0;
  for (const auto& col : c.columns) best = std::max(best, std::abs(dot(col, c.y)));
  return 2.0 * best;
}

double objective(const LassoFit& fit, const DesignMatrix& x, std::span<const double> y) {
  const DesignMatrix scaled = fit.scaling ? stats::apply_scaling(x, *fit.scaling) : x;
  double rss = 0.0, l1 = 0.0;
  for (std::size_t i = 0; i < scaled.rows(); ++i) {
    const double r = y[i] - fit.intercept - dot(scaled.values.row(i), fit.coefficients);
    rss += r * r;
  }
  for (double b : fit.coefficients) l1 += std::abs(b);
  return rss + fit.lambda * l1;
}

std::vector<double> LassoFit::predict(const DesignMatrix& x) const {
  if (x.cols() != coefficients.size())
    throw InputError(fmt::format("model has {} coefficients but design has {} columns", coefficients.size(), x.cols()));
  const DesignMatrix scaled = scaling ? stats::apply_scaling(x, *scaling) : x;
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = intercept + dot(scaled.values.row(i), coefficients);
  return out;
}

std::pair<double, std::vector<double>> LassoFit::original_scale() const {
  if (!scaling) return {intercept, coefficients};
  std::vector<double> beta(coefficients.size());
  double a = intercept;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    beta[j] = coefficients[j] / scaling->sds[j];
    a -= beta[j] * scaling->means[j];
  }
  return {a, beta};
}

LambdaSelection select_lambda(const DesignMatrix& x, std::span<const double> y, const LassoConfig& cfg) {
  check_inputs(x, y);
  LambdaSelection sel;
  const std::size_t n = x.rows();
  sel.fit_rows = split_point(n, 0.8);
  sel.validation_rows = n - sel.fit_rows;

  const DesignMatrix head = x.row_block(0, sel.fit_rows);
  const DesignMatrix tail = x.row_block(sel.fit_rows, sel.validation_rows);
  const std::span<const double> y_head = y.first(sel.fit_rows), y_tail = y.subspan(sel.fit_rows);

  const auto c = center(head, y_head, cfg.standardize_features);
  double top = 0.0;
  for (const auto& col : c.columns) top = std::max(top, std::abs(dot(col, c.y)));
  top *= 2.0;
  if (top == 0.0) {
    sel.lambda = 0.0;
    return sel;
  }

  constexpr int points = 50;
  std::vector<double> warm(x.cols(), 0.0);
  double best_mse = 0.0;
  for (int k = 0; k < points; ++k) {
    const double lambda = top * std::pow(1e-4, static_cast<double>(k) / (points - 1));
    const LassoFit fit = solve(c, x.labels, lambda, cfg, warm, false);
    warm = fit.coefficients;
    const auto pred = fit.predict(tail);
    double mse = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) mse += (y_tail[i] - pred[i]) * (y_tail[i] - pred[i]);
    mse /= static_cast<double>(pred.size());
    sel.grid.push_back(lambda);
    sel.validation_mse.push_back(mse);
    if (k == 0 || mse < best_mse) {
      best_mse = mse;
      sel.lambda = lambda;
    }
  }
  sel.lambda *= static_cast<double>(n) / static_cast<double>(sel.fit_rows);
  return sel;
}

InfluenceWeights influence_weights(const AlignedPanel& panel, std::string_view target, const LassoConfig& cfg) {
  panel.validate();
  const std::size_t t = panel.index_of(target);
  if (panel.cols() < 2) throw InputError("influence analysis needs at least one predictor column");

  DesignMatrix x;
  x.values = Matrix(panel.rows(), panel.cols() - 1);
  x.dates = panel.dates;
  std::size_t out_col = 0;
  for (std::size_t c = 0; c < panel.cols(); ++c) {
    if (c == t) continue;
    x.labels.push_back(panel.labels[c]);
    x.values.set_column(out_col++, panel.columns[c]);
  }
  const auto& y = panel.columns[t];

  InfluenceWeights out;
  out.target = std::string(target);
  LassoConfig resolved = cfg;
  if (!cfg.lambda) {
    out.selection = select_lambda(x, y, cfg);
    resolved.lambda = out.selection->lambda;
  }
  out.fit = fit_lasso(x, y, resolved);
  out.labels = x.labels;
  out.weights = out.fit.coefficients;
  return out;
}

std::string to_json(const LassoFit& fit) {
  nlohmann::ordered_json j;
  j["intercept"] = fit.intercept;
  j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < fit.coefficients.size(); ++i)
    j["coefficients"].push_back({{"label", fit.labels.at(i)}, {"weight", fit.coefficients[i]}});
  j["lambda"] = fit.lambda;
  j["budget"] = fit.budget;
  j["converged"] = fit.converged;
  j["sweeps_used"] = fit.sweeps_used;
  j["objective"] = fit.objective;
  j["standardized"] = fit.scaling.has_value();
  return json_util::dump(j);
}

std::string weights_csv(std::span<const std::string> labels, std::span<const double> weights) {
  std::string out = "label,weight\n";
  for (std::size_t i = 0; i < labels.size(); ++i) out += labels[i] + "," + io::fixed6(weights[i]) + "\n";
  return out;
}

}  // namespace lagcast::lasso
