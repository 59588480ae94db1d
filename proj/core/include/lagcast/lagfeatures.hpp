#pragma once

#include <span>
#include <string>
#include <vector>

#include "lagcast/lasso.hpp"
#include "lagcast/matrix.hpp"
#include "lagcast/timeseries.hpp"

namespace lagcast::lags {

/// A feature column outside the lag block: `channel` observed `lag` trading
/// days before the row date (lag 0 = same day).
struct Covariate {
  Channel channel = Channel::Open;
  std::size_t lag = 0;

  std::string label() const;
  friend bool operator==(const Covariate&, const Covariate&) = default;
};

/// Same-day open, high, low and volume.
std::vector<Covariate> default_covariates();
/// The 405-node arrangement: the four same-day covariates plus the prior day's volume.
std::vector<Covariate> deep_history_covariates();

struct LagSpec {
  std::vector<Channel> channels{Channel::Close};
  /// Lag depth H: columns <channel>_lag1 .. <channel>_lagH per channel.
  std::size_t history_points = 1;
  bool include_current_covariates = false;
  std::vector<Covariate> covariates = default_covariates();
  Channel target = Channel::Close;

  /// Throws ConfigError: H >= 1, channels nonempty and distinct, no same-day
  /// target covariate, no covariate duplicating a lag column.
  void validate() const;
};

/// Column count a spec produces: |channels| * H (+ |covariates| when enabled).
std::size_t node_count(const LagSpec& spec);

/// Labels in column order: channel-major lag block ("close_lag1", ...,
/// "close_lagH", "open_lag1", ...), then covariates.
std::vector<std::string> column_labels(const LagSpec& spec);

/// Design matrix of lagged values with target = same-day target channel.
/// Row t (t >= H) is dated frame[t]; the first H rows are dropped.
/// Throws InputError when the frame has <= H rows.
DesignMatrix build_lag_matrix(const SeriesFrame& frame, const LagSpec& spec);

/// "date,<features...>,target" with round-trip numbers.
std::string to_csv(const DesignMatrix& lag_matrix);

struct ProfileEntry {
  std::string channel;
  std::size_t lag = 0;
  double weight = 0.0;
};

struct FeedbackProfile {
  std::vector<ProfileEntry> entries;  // ordered by lag, then column order
  lasso::LassoFit fit;
  std::size_t positive = 0;
  std::size_t negative = 0;
  std::size_t zero = 0;
};

/// LASSO of the target on the lag matrix, coefficients keyed by (channel, lag).
FeedbackProfile feedback_profile(const SeriesFrame& frame, const LagSpec& spec, const lasso::LassoConfig& cfg);

/// "channel,lag,weight", six decimals.
std::string to_csv(const FeedbackProfile& profile);
/// One polyline per channel of weight against lag, with a zero line.
std::string to_svg(const FeedbackProfile& profile, const std::string& title);

}  // namespace lagcast::lags
