#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lagcast/date.hpp"
#include "lagcast/matrix.hpp"

namespace lagcast {

enum class Channel { Open, High, Low, Close, Volume };

/// Lower-case channel name ("open", "high", ...).
std::string_view channel_name(Channel c) noexcept;
/// Case-insensitive inverse of channel_name. Throws InputError.
Channel parse_channel(std::string_view name);

/// One trading day of an instrument.
struct Bar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;
  double volume = 0.0;

  double get(Channel c) const noexcept;
  friend bool operator==(const Bar&, const Bar&) = default;
};

/// One instrument's daily OHLCV history.
///
/// Construction sorts the rows by date and enforces: strictly increasing
/// dates, finite positive prices, low <= min(open, close), high >=
/// max(open, close), finite nonnegative volume. Immutable afterwards.
class SeriesFrame {
 public:
  SeriesFrame() = default;
  /// Throws ValidationError if any invariant fails.
  SeriesFrame(std::string instrument, std::vector<Bar> rows, bool volume_missing = false);

  const std::string& instrument() const noexcept { return instrument_; }
  std::span<const Bar> rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }
  /// True when the source had no Volume column (volumes stored as zero).
  bool volume_missing() const noexcept { return volume_missing_; }

  std::vector<double> channel(Channel c) const;
  std::vector<Date> dates() const;

  /// Rows whose date lies in [from, to]; open bounds when nullopt.
  SeriesFrame between(std::optional<Date> from, std::optional<Date> to) const;

  friend bool operator==(const SeriesFrame&, const SeriesFrame&) = default;

 private:
  std::string instrument_;
  std::vector<Bar> rows_;
  bool volume_missing_ = false;
};

/// Parses an OHLCV CSV document. The header must name Date, Open, High, Low
/// and Close (case-insensitive); Volume is optional and other columns (e.g.
/// "Adj Close") are ignored. Dates are ISO (YYYY-MM-DD) or US (MM/DD/YYYY),
/// the format being fixed by the first data row.
///
/// Throws ParseError (with line number) on malformed text and ValidationError
/// on duplicate dates or inconsistent OHLC values.
SeriesFrame parse_ohlcv_csv(std::string_view text, std::string instrument);

/// Reads and parses a file. Throws InputError naming the path if unreadable.
SeriesFrame load_ohlcv_csv(const std::filesystem::path& path, std::string instrument);

/// Inverse of parse_ohlcv_csv (ISO dates, shortest round-trip numbers). The
/// Volume column is omitted when the frame's volume is missing.
std::string to_csv(const SeriesFrame& frame);

/// Several instruments on one shared date axis.
struct AlignedPanel {
  std::vector<Date> dates;
  std::vector<std::string> labels;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const noexcept { return dates.size(); }
  std::size_t cols() const noexcept { return labels.size(); }

  /// Throws InputError if absent.
  std::size_t index_of(std::string_view label) const;
  std::span<const double> column(std::string_view label) const { return columns[index_of(label)]; }

  /// Throws InputError on ragged columns or non-increasing dates.
  void validate() const;
  AlignedPanel row_block(std::size_t first, std::size_t count) const;
  /// Drops the first date and replaces each value by log(v_t / v_{t-1}).
  AlignedPanel log_returns() const;

  friend bool operator==(const AlignedPanel&, const AlignedPanel&) = default;
};

/// Inner join on dates of the selected channel. Columns follow frame order and
/// are labeled by instrument. Throws InputError for fewer than two frames and
/// AlignmentError, listing every frame's date range, when no date is common.
AlignedPanel align_inner(std::span<const SeriesFrame> frames, Channel channel);

/// "Date,<label>,..." with shortest round-trip numbers.
std::string to_csv(const AlignedPanel& panel);

/// Number of head rows for a chronological split: floor(n * fraction).
/// Throws SplitError when either side would be empty or the fraction is
/// outside (0, 1).
std::size_t split_point(std::size_t rows, double train_fraction);

std::pair<AlignedPanel, AlignedPanel> chronological_split(const AlignedPanel& panel, double train_fraction);
std::pair<DesignMatrix, DesignMatrix> chronological_split(const DesignMatrix& matrix, double train_fraction);

}  // namespace lagcast
