#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "lagcast/date.hpp"
#include "lagcast/matrix.hpp"
#include "lagcast/timeseries.hpp"

namespace lagcast::synth {

/// xorshift64* generator, fully specified so that any implementation can
/// reproduce its streams:
///
///   state_0 = splitmix64(seed)            (0 is replaced by 0x9E3779B97F4A7C15)
///   x ^= x >> 12; x ^= x << 25; x ^= x >> 27; out = x * 0x2545F4914F6CDD1D
///   uniform() = (out >> 11) * 2^-53                          in [0, 1)
///   normal(): Box-Muller on u1 = 1 - uniform(), u2 = uniform();
///             returns r cos(2 pi u2) and caches r sin(2 pi u2) for the next call.
class Xorshift64Star {
 public:
  explicit Xorshift64Star(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;
  double uniform() noexcept;
  double normal() noexcept;

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

enum class Kind { ArProcess, LatentFactor, CorrelatedPanel, WhiteNoise };

std::string_view kind_name(Kind k) noexcept;
/// Accepts "ar"/"ar_process", "latent"/"latent_factor", "corr"/"correlated_panel",
/// "white"/"white_noise". Throws ConfigError.
Kind parse_kind(std::string_view name);

struct GeneratorSpec {
  Kind kind = Kind::WhiteNoise;
  /// x_t = sum_i phi_i x_{t-i} + noise_scale * e_t
  std::vector<double> ar_coefficients;
  /// Latent factors: pairs of sinusoids (sin and cos at one period) plus a
  /// linear trend when the count is odd. Each factor has a loading
  /// (amplitude); defaults to 10 for every factor.
  std::size_t factor_count = 3;
  std::vector<double> loadings;
  /// Target correlation for correlated_panel (square, PSD, unit diagonal).
  Matrix correlation;
  /// Column names for correlated_panel; defaults to S1..Sm.
  std::vector<std::string> labels;
  double noise_scale = 1.0;
  /// Constant added to every close path so that prices stay positive.
  double level = 100.0;
  std::size_t length = 1000;
  std::uint64_t seed = 1;
  std::string instrument = "SYNTH";
  Date start = Date::from_ymd(2015, 1, 2);
  /// AR warm-up steps discarded before the first recorded value.
  std::size_t burn_in = 500;

  /// Throws SpecError for a nonstationary AR polynomial, a non-PSD or
  /// malformed correlation target, or nonpositive sizes/scales.
  void validate() const;
};

/// True iff every root of the AR companion matrix lies strictly inside the unit
/// circle, decided by the Schur-Cohn (Levinson step-down) recursion.
bool is_stationary(std::span<const double> phi);

/// Lower-triangular L with L L' = r for a positive semidefinite r (zero
/// pivots allowed). Throws SpecError if r is not PSD within 1e-10.
Matrix psd_cholesky(const Matrix& r);

/// `count` consecutive weekdays beginning at the first weekday >= start.
std::vector<Date> trading_calendar(Date start, std::size_t count);

/// Builds a valid OHLCV frame around a positive close path: open near the
/// prior close, high/low bracketing open and close, lognormal volume.
/// Throws SpecError if any close is not positive.
SeriesFrame synthesize_ohlc(std::string instrument, std::span<const Date> dates, std::span<const double> closes,
                            double spread, Xorshift64Star& rng);

/// Deterministic for a fixed spec. ar_process, latent_factor and white_noise
/// produce a SeriesFrame; correlated_panel produces an AlignedPanel.
std::variant<SeriesFrame, AlignedPanel> generate(const GeneratorSpec& spec);

/// One OHLCV frame per panel column (for writing generated panels as CSV).
std::vector<SeriesFrame> panel_to_frames(const AlignedPanel& panel, std::uint64_t seed, double spread);

}  // namespace lagcast::synth
