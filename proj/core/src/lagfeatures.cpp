#include "lagcast/lagfeatures.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "lagcast/error.hpp"
#include "lagcast/io.hpp"
#include "svg.hpp"

namespace lagcast::lags {
namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

std::string Covariate::label() const {
  if (lag == 0) return fmt::format("{}_same_day", channel_name(channel));
  return fmt::format("{}_lag{}", channel_name(channel), lag);
}

std::vector<Covariate> default_covariates() {
  return {{Channel::Open, 0}, {Channel::High, 0}, {Channel::Low, 0}, {Channel::Volume, 0}};
}

std::vector<Covariate> deep_history_covariates() {
  auto c = default_covariates();
  c.push_back({Channel::Volume, 1});
  return c;
}

void LagSpec::validate() const {
  if (history_points < 1) throw ConfigError("history points must be >= 1");
  if (channels.empty()) throw ConfigError("at least one lag channel is required");
  for (std::size_t i = 0; i < channels.size(); ++i)
    for (std::size_t j = i + 1; j < channels.size(); ++j)
      if (channels[i] == channels[j]) throw ConfigError(fmt::format("lag channel '{}' listed twice", channel_name(channels[i])));
  if (!include_current_covariates) return;
  for (std::size_t i = 0; i < covariates.size(); ++i) {
    const auto& c = covariates[i];
    if (c.lag == 0 && c.channel == target)
      throw ConfigError(fmt::format("covariate '{}' is the same-day target and would leak it", c.label()));
    if (c.lag > history_points)
      throw ConfigError(fmt::format("covariate '{}' reaches past the history depth {}", c.label(), history_points));
    if (c.lag > 0 && std::find(channels.begin(), channels.end(), c.channel) != channels.end())
      throw ConfigError(fmt::format("covariate '{}' duplicates a lag column", c.label()));
    for (std::size_t j = 0; j < i; ++j)
      if (covariates[j] == c) throw ConfigError(fmt::format("covariate '{}' listed twice", c.label()));
  }
}

std::size_t node_count(const LagSpec& spec) {
  return spec.channels.size() * spec.history_points + (spec.include_current_covariates ? spec.covariates.size() : 0);
}

std::vector<std::string> column_labels(const LagSpec& spec) {
  std::vector<std::string> labels;
  labels.reserve(node_count(spec));
  for (Channel c : spec.channels)
    for (std::size_t k = 1; k <= spec.history_points; ++k) labels.push_back(fmt::format("{}_lag{}", channel_name(c), k));
  if (spec.include_current_covariates)
    for (const auto& cov : spec.covariates) labels.push_back(cov.label());
  return labels;
}

DesignMatrix build_lag_matrix(const SeriesFrame& frame, const LagSpec& spec) {
  spec.validate();
  const std::size_t h = spec.history_points;
  if (frame.size() <= h)
    throw InputError(fmt::format("{}: history depth {} needs at least {} rows, series has {}", frame.instrument(), h, h + 1,
                                 frame.size()));

  const auto bars = frame.rows();
  const std::size_t rows = bars.size() - h;
  DesignMatrix out;
  out.labels = column_labels(spec);
  out.values = Matrix(rows, out.labels.size());
  out.dates.reserve(rows);
  out.target.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t t = r + h;
    auto row = out.values.row(r);
    std::size_t col = 0;
    for (Channel c : spec.channels)
      for (std::size_t k = 1; k <= h; ++k) row[col++] = bars[t - k].get(c);
    if (spec.include_current_covariates)
      for (const auto& cov : spec.covariates) row[col++] = bars[t - cov.lag].get(cov.channel);
    out.dates.push_back(bars[t].date);
    out.target.push_back(bars[t].get(spec.target));
  }
  return out;
}

std::string to_csv(const DesignMatrix& lag_matrix) {
  std::string out = "date";
  for (const auto& l : lag_matrix.labels) out += "," + l;
  out += ",target\n";
  for (std::size_t r = 0; r < lag_matrix.rows(); ++r) {
    out += r < lag_matrix.dates.size() ? lag_matrix.dates[r].iso() : std::to_string(r);
    for (double v : lag_matrix.values.row(r)) out += "," + io::round_trip(v);
    out += "," + (r < lag_matrix.target.size() ? io::round_trip(lag_matrix.target[r]) : std::string());
    out += '\n';
  }
  return out;
}

FeedbackProfile feedback_profile(const SeriesFrame& frame, const LagSpec& spec, const lasso::LassoConfig& cfg) {
  const DesignMatrix x = build_lag_matrix(frame, spec);
  FeedbackProfile profile;
  profile.fit = lasso::fit_lasso(x, x.target, cfg);

  struct Keyed {
    std::size_t lag;
    std::size_t column;
    std::string channel;
  };
  std::vector<Keyed> keys;
  std::size_t col = 0;
  for (Channel c : spec.channels)
    for (std::size_t k = 1; k <= spec.history_points; ++k) keys.push_back({k, col++, std::string(channel_name(c))});
  if (spec.include_current_covariates)
    for (const auto& cov : spec.covariates) keys.push_back({cov.lag, col++, std::string(channel_name(cov.channel))});
  std::stable_sort(keys.begin(), keys.end(), [](const Keyed& a, const Keyed& b) { return a.lag < b.lag; });

  for (const auto& k : keys) {
    const double w = profile.fit.coefficients[k.column];
    profile.entries.push_back({k.channel, k.lag, w});
    if (w > 0.0) ++profile.positive;
    else if (w < 0.0) ++profile.negative;
    else ++profile.zero;
  }
  return profile;
}

std::string to_csv(const FeedbackProfile& profile) {
  std::string out = "channel,lag,weight\n";
  for (const auto& e : profile.entries) out += fmt::format("{},{},{}\n", e.channel, e.lag, io::fixed6(e.weight));
  return out;
}

std::string to_svg(const FeedbackProfile& profile, const std::string& title) {
  constexpr double width = 760, height = 420, left = 70, right = 150, top = 50, bottom = 50;
  const double plot_w = width - left - right, plot_h = height - top - bottom;

  std::size_t max_lag = 1;
  double lo = 0.0, hi = 0.0;
  for (const auto& e : profile.entries) {
    max_lag = std::max(max_lag, e.lag);
    lo = std::min(lo, e.weight);
    hi = std::max(hi, e.weight);
  }
  if (hi - lo < 1e-12) {
    hi += 1.0;
    lo -= 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  auto px = [&](double lag) { return left + plot_w * lag / static_cast<double>(max_lag); };
  auto py = [&](double w) { return top + plot_h * (hi - w) / (hi - lo); };

  svg::Document doc(static_cast<int>(width), static_cast<int>(height));
  doc.text(width / 2, 28, title, 15, "middle");
  doc.line(left, top, left, top + plot_h, "#000000");
  doc.line(left, top + plot_h, left + plot_w, top + plot_h, "#000000");
  doc.line(left, py(0.0), left + plot_w, py(0.0), "#888888", 0.8);
  doc.text(left - 6, py(hi) + 4, fmt::format("{:.3g}", hi), 10, "end");
  doc.text(left - 6, py(lo) + 4, fmt::format("{:.3g}", lo), 10, "end");
  doc.text(left - 6, py(0.0) + 4, "0", 10, "end");
  doc.text(px(0), top + plot_h + 16, "0", 10, "middle");
  doc.text(px(static_cast<double>(max_lag)), top + plot_h + 16, std::to_string(max_lag), 10, "middle");
  doc.text(left + plot_w / 2, height - 12, "lag (trading days)", 12, "middle");

  // Group points by channel, keeping first-seen order.
  std::vector<std::string> order;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& e : profile.entries) {
    if (!series.count(e.channel)) order.push_back(e.channel);
    series[e.channel].emplace_back(px(static_cast<double>(e.lag)), py(e.weight));
  }
  for (std::size_t i = 0; i < order.size(); ++i) {
    const char* color = kPalette[i % std::size(kPalette)];
    const auto& pts = series[order[i]];
    if (pts.size() > 1) doc.polyline(pts, color);
    for (const auto& [x, y] : pts) doc.circle(x, y, 2.0, color);
    const double ly = top + 14.0 + 18.0 * static_cast<double>(i);
    doc.line(left + plot_w + 15, ly - 4, left + plot_w + 35, ly - 4, color, 2.0);
    doc.text(left + plot_w + 40, ly, order[i], 11, "start");
  }
  return doc.str();
}

}  // namespace lagcast::lags
