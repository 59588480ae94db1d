#include "lagcast/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "lagcast/error.hpp"

namespace lagcast::synth {
namespace {

// Periods (trading days) of the latent sinusoid pairs, in order of use.
constexpr double kPeriods[] = {61.0, 23.0, 137.0, 37.0, 89.0, 13.0};

std::vector<double> ar_path(const GeneratorSpec& spec, Xorshift64Star& rng) {
  const std::size_t p = spec.ar_coefficients.size();
  std::vector<double> x(spec.burn_in + spec.length, 0.0);
  for (std::size_t t = 0; t < x.size(); ++t) {
    double v = spec.noise_scale * rng.normal();
    for (std::size_t i = 1; i <= p && i <= t; ++i) v += spec.ar_coefficients[i - 1] * x[t - i];
    x[t] = v;
  }
  std::vector<double> closes(x.begin() + static_cast<std::ptrdiff_t>(spec.burn_in), x.end());
  for (double& c : closes) c += spec.level;
  return closes;
}

std::vector<double> latent_path(const GeneratorSpec& spec, Xorshift64Star& rng) {
  const std::size_t r = spec.factor_count;
  std::vector<double> loadings = spec.loadings;
  if (loadings.empty()) loadings.assign(r, 10.0);
  std::vector<double> closes(spec.length, spec.level);
  const double n = static_cast<double>(spec.length);
  for (std::size_t t = 0; t < spec.length; ++t) {
    const double tt = static_cast<double>(t);
    for (std::size_t pair = 0; pair < r / 2; ++pair) {
      const double w = 2.0 * std::numbers::pi / kPeriods[pair % std::size(kPeriods)];
      closes[t] += loadings[2 * pair] * std::sin(w * tt) + loadings[2 * pair + 1] * std::cos(w * tt);
    }
    if (r % 2 == 1) closes[t] += loadings[r - 1] * tt / n;
    closes[t] += spec.noise_scale * rng.normal();
  }
  return closes;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Xorshift64Star::Xorshift64Star(std::uint64_t seed) noexcept : state_(splitmix64(seed)) {
  if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Xorshift64Star::next() noexcept {
  state_ ^= state_ >> 12;
  state_ ^= state_ << 25;
  state_ ^= state_ >> 27;
  return state_ * 0x2545F4914F6CDD1DULL;
}

double Xorshift64Star::uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double Xorshift64Star::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::string_view kind_name(Kind k) noexcept {
  switch (k) {
    case Kind::ArProcess: return "ar_process";
    case Kind::LatentFactor: return "latent_factor";
    case Kind::CorrelatedPanel: return "correlated_panel";
    case Kind::WhiteNoise: return "white_noise";
  }
  return "?";
}

Kind parse_kind(std::string_view name) {
  if (name == "ar" || name == "ar_process") return Kind::ArProcess;
  if (name == "latent" || name == "latent_factor") return Kind::LatentFactor;
  if (name == "corr" || name == "correlated_panel") return Kind::CorrelatedPanel;
  if (name == "white" || name == "white_noise") return Kind::WhiteNoise;
  throw ConfigError(fmt::format("unknown generator kind '{}' (expected ar, latent, corr or white)", name));
}

bool is_stationary(std::span<const double> phi) {
  std::vector<double> a(phi.begin(), phi.end());
  for (std::size_t k = a.size(); k > 0; --k) {
    const double kappa = a[k - 1];
    if (!(std::abs(kappa) < 1.0)) return false;
    std::vector<double> next(k - 1);
    for (std::size_t i = 0; i + 1 < k; ++i) next[i] = (a[i] + kappa * a[k - 2 - i]) / (1.0 - kappa * kappa);
    a = std::move(next);
  }
  return true;
}

Matrix psd_cholesky(const Matrix& r) {
  const std::size_t n = r.rows();
  if (r.cols() != n) throw SpecError("correlation target must be square");
  constexpr double tol = 1e-10;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = r(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -tol) throw SpecError("correlation target is not positive semidefinite");
    const bool zero_pivot = d <= tol;
    l(j, j) = zero_pivot ? 0.0 : std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = r(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      if (zero_pivot) {
        if (std::abs(s) > 1e-8) throw SpecError("correlation target is not positive semidefinite");
        l(i, j) = 0.0;
      } else {
        l(i, j) = s / l(j, j);
      }
    }
  }
  return l;
}

void GeneratorSpec::validate() const {
  if (length < 2) throw SpecError("generated length must be at least 2");
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) throw SpecError("noise scale must be finite and >= 0");
  if (!std::isfinite(level)) throw SpecError("level must be finite");
  switch (kind) {
    case Kind::ArProcess:
      if (ar_coefficients.empty()) throw SpecError("ar_process needs at least one coefficient");
      if (!is_stationary(ar_coefficients))
        throw SpecError("AR coefficients are not stationary (companion spectral radius >= 1)");
      break;
    case Kind::LatentFactor:
      if (factor_count < 1 || factor_count > 2 * std::size(kPeriods) + 1)
        throw SpecError(fmt::format("latent_factor supports 1 to {} factors", 2 * std::size(kPeriods) + 1));
      if (!loadings.empty() && loadings.size() != factor_count)
        throw SpecError(fmt::format("{} loadings given for {} factors", loadings.size(), factor_count));
      break;
    case Kind::CorrelatedPanel: {
      const std::size_t m = correlation.rows();
      if (m < 2 || correlation.cols() != m) throw SpecError("correlated_panel needs a square target of size >= 2");
      if (!labels.empty() && labels.size() != m) throw SpecError("label count does not match the correlation target");
      for (std::size_t i = 0; i < m; ++i) {
        if (std::abs(correlation(i, i) - 1.0) > 1e-12) throw SpecError("correlation target needs a unit diagonal");
        for (std::size_t j = 0; j < m; ++j) {
          if (std::abs(correlation(i, j) - correlation(j, i)) > 1e-12) throw SpecError("correlation target is not symmetric");
          if (std::abs(correlation(i, j)) > 1.0) throw SpecError("correlation entries must lie in [-1, 1]");
        }
      }
      psd_cholesky(correlation);
      break;
    }
    case Kind::WhiteNoise:
      break;
  }
}

std::vector<Date> trading_calendar(Date start, std::size_t count) {
  std::vector<Date> out;
  out.reserve(count);
  Date d = start;
  while (out.size() < count) {
    const unsigned wd = d.weekday();
    if (wd != 0 && wd != 6) out.push_back(d);
    d = d.plus_days(1);
  }
  return out;
}

SeriesFrame synthesize_ohlc(std::string instrument, std::span<const Date> dates, std::span<const double> closes,
                            double spread, Xorshift64Star& rng) {
  if (dates.size() != closes.size()) throw SpecError("date and close counts differ");
  std::vector<Bar> bars(closes.size());
  for (std::size_t t = 0; t < closes.size(); ++t) {
    const double close = closes[t];
    if (!(close > 0.0) || !std::isfinite(close))
      throw SpecError(fmt::format("synthetic close {} at step {} is not positive; raise the level", close, t));
    const double prev = t == 0 ? close : closes[t - 1];
    double open = prev + spread * rng.normal();
    if (!(open > 0.0)) open = close;
    const double top = std::max(open, close), bottom = std::min(open, close);
    const double high = top + spread * std::abs(rng.normal());
    double low = bottom - spread * std::abs(rng.normal());
    if (!(low > 0.0)) low = bottom;
    const double volume = std::round(1e6 * std::exp(0.25 * rng.normal()));
    bars[t] = Bar{dates[t], open, high, low, close, volume};
  }
  return SeriesFrame(std::move(instrument), std::move(bars));
}

std::variant<SeriesFrame, AlignedPanel> generate(const GeneratorSpec& spec) {
  spec.validate();
  Xorshift64Star rng(spec.seed);
  const auto dates = trading_calendar(spec.start, spec.length);
  const double spread = 0.1 * (spec.noise_scale > 0.0 ? spec.noise_scale : 1.0);

  switch (spec.kind) {
    case Kind::WhiteNoise: {
      std::vector<double> closes(spec.length);
      for (double& c : closes) c = spec.level + spec.noise_scale * rng.normal();
      return synthesize_ohlc(spec.instrument, dates, closes, spread, rng);
    }
    case Kind::ArProcess:
      return synthesize_ohlc(spec.instrument, dates, ar_path(spec, rng), spread, rng);
    case Kind::LatentFactor:
      return synthesize_ohlc(spec.instrument, dates, latent_path(spec, rng), spread, rng);
    case Kind::CorrelatedPanel: {
      const std::size_t m = spec.correlation.rows();
      const Matrix l = psd_cholesky(spec.correlation);
      AlignedPanel panel;
      panel.dates = dates;
      for (std::size_t c = 0; c < m; ++c)
        panel.labels.push_back(spec.labels.empty() ? fmt::format("S{}", c + 1) : spec.labels[c]);
      panel.columns.assign(m, std::vector<double>(spec.length));
      std::vector<double> z(m);
      for (std::size_t t = 0; t < spec.length; ++t) {
        for (double& v : z) v = rng.normal();
        for (std::size_t i = 0; i < m; ++i) {
          double s = 0.0;
          for (std::size_t k = 0; k <= i; ++k) s += l(i, k) * z[k];
          panel.columns[i][t] = spec.level + spec.noise_scale * s;
        }
      }
      return panel;
    }
  }
  throw SpecError("unknown generator kind");
}

std::vector<SeriesFrame> panel_to_frames(const AlignedPanel& panel, std::uint64_t seed, double spread) {
  panel.validate();
  Xorshift64Star rng(splitmix64(seed ^ 0x5DEECE66DULL));
  std::vector<SeriesFrame> frames;
  for (std::size_t c = 0; c < panel.cols(); ++c)
    frames.push_back(synthesize_ohlc(panel.labels[c], panel.dates, panel.columns[c], spread, rng));
  return frames;
}

}  // namespace lagcast::synth
