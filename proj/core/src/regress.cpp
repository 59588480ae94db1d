#include "lagcast/regress.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "json_util.hpp"
#include "lagcast/error.hpp"
#include "lagcast/io.hpp"

namespace lagcast::regress {

OlsFit fit_ols(const DesignMatrix& x, std::span<const double> y) {
  x.check_shape();
  const std::size_t n = x.rows(), p = x.cols() + 1;
  if (y.size() != n) throw InputError(fmt::format("design has {} rows but target has {}", n, y.size()));
  if (n < p) throw InputError(fmt::format("OLS with {} columns plus intercept needs at least {} rows, got {}", x.cols(), p, n));
  for (double v : x.values.data())
    if (!std::isfinite(v)) throw InputError("design matrix contains a non-finite value");
  for (double v : y)
    if (!std::isfinite(v)) throw InputError("target contains a non-finite value");

  // Column-major copy of [1 | X]; the reflections overwrite it with R.
  std::vector<std::vector<double>> a(p, std::vector<double>(n, 1.0));
  for (std::size_t j = 1; j < p; ++j)
    for (std::size_t i = 0; i < n; ++i) a[j][i] = x.values(i, j - 1);
  std::vector<double> qty(y.begin(), y.end());

  std::vector<double> diag(p);
  for (std::size_t k = 0; k < p; ++k) {
    auto& ak = a[k];
    double norm = 0.0;
    for (std::size_t i = k; i < n; ++i) norm += ak[i] * ak[i];
    norm = std::sqrt(norm);
    const double alpha = ak[k] > 0.0 ? -norm : norm;
    diag[k] = alpha;
    if (norm == 0.0) continue;

    // v = a_k[k:] - alpha e_1, stored in place.
    ak[k] -= alpha;
    double vnorm2 = 0.0;
    for (std::size_t i = k; i < n; ++i) vnorm2 += ak[i] * ak[i];
    if (vnorm2 == 0.0) continue;

    auto reflect = [&](std::vector<double>& col) {
      double s = 0.0;
      for (std::size_t i = k; i < n; ++i) s += ak[i] * col[i];
      s = 2.0 * s / vnorm2;
      for (std::size_t i = k; i < n; ++i) col[i] -= s * ak[i];
    };
    for (std::size_t j = k + 1; j < p; ++j) reflect(a[j]);
    reflect(qty);
  }

  double rmax = 0.0;
  for (double d : diag) rmax = std::max(rmax, std::abs(d));
  for (std::size_t k = 0; k < p; ++k) {
    if (!(std::abs(diag[k]) >= 1e-10 * rmax) || rmax == 0.0) {
      const std::string name = k == 0 ? "(intercept)" : x.labels[k - 1];
      throw RankError(fmt::format("design is rank deficient: column '{}' is (nearly) a linear combination of earlier columns", name),
                      name);
    }
  }

  // Back substitution on R b = Q'y; R's strict upper triangle sits in a[j][k], j > k.
  std::vector<double> b(p);
  for (std::size_t k = p; k-- > 0;) {
    double s = qty[k];
    for (std::size_t j = k + 1; j < p; ++j) s -= a[j][k] * b[j];
    b[k] = s / diag[k];
  }

  OlsFit fit;
  fit.intercept = b[0];
  fit.coefficients.assign(b.begin() + 1, b.end());
  fit.labels = x.labels;
  for (double v : b)
    if (!std::isfinite(v)) throw InvariantError("OLS produced a non-finite coefficient");
  return fit;
}

std::vector<double> predict(const OlsFit& fit, const DesignMatrix& x) {
  if (x.labels != fit.labels)
    throw InputError(fmt::format("prediction design columns do not match the fitted model ({} vs {} columns)", x.cols(),
                                 fit.labels.size()));
  std::vector<double> out(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) out[i] = fit.intercept + dot(x.values.row(i), fit.coefficients);
  return out;
}

MetricsReport metrics(std::span<const double> actual, std::span<const double> predicted, bool require_r2) {
  if (actual.size() != predicted.size())
    throw InputError(fmt::format("metrics: {} actual values vs {} predictions", actual.size(), predicted.size()));
  if (actual.size() < 2) throw InputError("metrics need at least 2 values");
  const double n = static_cast<double>(actual.size());
  double sse = 0.0, sae = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    const double e = actual[i] - predicted[i];
    sse += e * e;
    sae += std::abs(e);
  }
  MetricsReport m;
  m.mse = sse / n;
  m.rmse = std::sqrt(m.mse);
  m.mae = sae / n;

  const bool constant = std::all_of(actual.begin(), actual.end(), [&](double v) { return v == actual.front(); });
  if (constant) {
    if (require_r2) throw DegenerateError("r2 is undefined for a constant target");
    return m;
  }
  const double ybar = mean(actual);
  double sst = 0.0;
  for (double v : actual) sst += (v - ybar) * (v - ybar);
  m.r2 = 1.0 - sse / sst;
  return m;
}

std::string to_json(const OlsFit& fit) {
  nlohmann::ordered_json j;
  j["intercept"] = fit.intercept;
  j["coefficients"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < fit.coefficients.size(); ++i)
    j["coefficients"].push_back({{"label", fit.labels.at(i)}, {"weight", fit.coefficients[i]}});
  return json_util::dump(j);
}

std::string to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["mse"] = report.mse;
  j["rmse"] = report.rmse;
  j["mae"] = report.mae;
  j["r2"] = report.r2 ? nlohmann::ordered_json(*report.r2) : nlohmann::ordered_json(nullptr);
  return json_util::dump(j);
}

std::string predictions_csv(std::span<const Date> dates, std::span<const double> actual, std::span<const double> predicted) {
  std::string out = "date,actual,predicted\n";
  for (std::size_t i = 0; i < actual.size(); ++i)
    out += fmt::format("{},{},{}\n", i < dates.size() ? dates[i].iso() : std::to_string(i), io::fixed6(actual[i]),
                       io::fixed6(predicted[i]));
  return out;
}

}  // namespace lagcast::regress
