#include "lagcast/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "lagcast/error.hpp"
#include "lagcast/io.hpp"

namespace lagcast {
namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

// Splits on commas outside double quotes.
std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  bool quoted = false;
  std::size_t start = 0;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    else if (line[i] == ',' && !quoted) {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  out.push_back(trim(line.substr(start)));
  return out;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

// Empty string when the bar is valid, otherwise a description of the violation.
std::string bar_problem(const Bar& b) {
  for (auto [name, v] : {std::pair{"open", b.open}, {"high", b.high}, {"low", b.low}, {"close", b.close}})
    if (!std::isfinite(v) || v <= 0.0) return fmt::format("{} price must be finite and positive (got {})", name, v);
  if (!std::isfinite(b.volume) || b.volume < 0.0) return fmt::format("volume must be finite and nonnegative (got {})", b.volume);
  if (b.low > std::min(b.open, b.close)) return fmt::format("low {} exceeds min(open, close) {}", b.low, std::min(b.open, b.close));
  if (b.high < std::max(b.open, b.close)) return fmt::format("high {} is below max(open, close) {}", b.high, std::max(b.open, b.close));
  return {};
}

std::string date_range(const SeriesFrame& f) {
  if (f.empty()) return fmt::format("{}: (no rows)", f.instrument());
  return fmt::format("{}: {} to {}", f.instrument(), f.rows().front().date.iso(), f.rows().back().date.iso());
}

}  // namespace

std::string_view channel_name(Channel c) noexcept {
  switch (c) {
    case Channel::Open: return "open";
    case Channel::High: return "high";
    case Channel::Low: return "low";
    case Channel::Close: return "close";
    case Channel::Volume: return "volume";
  }
  return "?";
}

Channel parse_channel(std::string_view name) {
  const std::string n = lower(trim(name));
  for (Channel c : {Channel::Open, Channel::High, Channel::Low, Channel::Close, Channel::Volume})
    if (n == channel_name(c)) return c;
  throw InputError(fmt::format("unknown channel '{}' (expected open, high, low, close or volume)", name));
}

double Bar::get(Channel c) const noexcept {
  switch (c) {
    case Channel::Open: return open;
    case Channel::High: return high;
    case Channel::Low: return low;
    case Channel::Close: return close;
    case Channel::Volume: return volume;
  }
  return 0.0;
}

SeriesFrame::SeriesFrame(std::string instrument, std::vector<Bar> rows, bool volume_missing)
    : instrument_(std::move(instrument)), rows_(std::move(rows)), volume_missing_(volume_missing) {
  std::stable_sort(rows_.begin(), rows_.end(), [](const Bar& a, const Bar& b) { return a.date < b.date; });
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (i > 0 && rows_[i].date == rows_[i - 1].date)
      throw ValidationError(fmt::format("{}: duplicate date {}", instrument_, rows_[i].date.iso()));
    if (auto p = bar_problem(rows_[i]); !p.empty())
      throw ValidationError(fmt::format("{}: row dated {}: {}", instrument_, rows_[i].date.iso(), p));
  }
}

std::vector<double> SeriesFrame::channel(Channel c) const {
  std::vector<double> out;
  out.reserve(rows_.size());
  for (const auto& b : rows_) out.push_back(b.get(c));
  return out;
}

std::vector<Date> SeriesFrame::dates() const {
  std::vector<Date> out;
  out.reserve(rows_.size());
  for (const auto& b : rows_) out.push_back(b.date);
  return out;
}

SeriesFrame SeriesFrame::between(std::optional<Date> from, std::optional<Date> to) const {
  std::vector<Bar> kept;
  for (const auto& b : rows_)
    if ((!from || b.date >= *from) && (!to || b.date <= *to)) kept.push_back(b);
  return SeriesFrame(instrument_, std::move(kept), volume_missing_);
}

SeriesFrame parse_ohlcv_csv(std::string_view text, std::string instrument) {
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

  std::vector<std::pair<std::size_t, std::string_view>> lines;  // (line number, content)
  std::size_t pos = 0, number = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++number;
    if (!trim(line).empty()) lines.emplace_back(number, line);
    pos = end + 1;
  }
  if (lines.empty()) throw ParseError(instrument + ": empty CSV document", 0);

  const auto header = split_fields(lines.front().second);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index.emplace(lower(header[i]), i);
  auto column = [&](const char* name) -> std::optional<std::size_t> {
    auto it = index.find(name);
    if (it == index.end()) return std::nullopt;
    return it->second;
  };
  const auto date_col = column("date");
  const auto open_col = column("open"), high_col = column("high"), low_col = column("low"), close_col = column("close");
  const auto volume_col = column("volume");
  for (auto [name, col] : {std::pair{"Date", date_col}, {"Open", open_col}, {"High", high_col}, {"Low", low_col}, {"Close", close_col}})
    if (!col) throw ParseError(fmt::format("{}: header lacks required column '{}'", instrument, name), lines.front().first);

  bool us_dates = false;
  std::vector<Bar> bars;
  std::vector<std::size_t> line_of;
  bars.reserve(lines.size() - 1);
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto [line_no, line] = lines[li];
    const auto fields = split_fields(line);
    auto field = [&](std::size_t col, const char* name) -> std::string_view {
      if (col >= fields.size()) throw ParseError(fmt::format("missing {} field", name), line_no);
      return fields[col];
    };

    const auto date_text = field(*date_col, "Date");
    if (li == 1) us_dates = !Date::parse_iso(date_text) && Date::parse_us(date_text);
    const auto date = us_dates ? Date::parse_us(date_text) : Date::parse_iso(date_text);
    if (!date)
      throw ParseError(fmt::format("malformed date '{}' (expected {})", date_text, us_dates ? "MM/DD/YYYY" : "YYYY-MM-DD"), line_no);

    auto number_at = [&](std::size_t col, const char* name) {
      const auto s = field(col, name);
      auto v = parse_number(s);
      if (!v) throw ParseError(fmt::format("non-numeric {} value '{}'", name, s), line_no);
      return *v;
    };
    Bar b;
    b.date = *date;
    b.open = number_at(*open_col, "Open");
    b.high = number_at(*high_col, "High");
    b.low = number_at(*low_col, "Low");
    b.close = number_at(*close_col, "Close");
    b.volume = volume_col ? number_at(*volume_col, "Volume") : 0.0;
    if (auto p = bar_problem(b); !p.empty())
      throw ValidationError(fmt::format("{}: line {} (date {}): {}", instrument, line_no, b.date.iso(), p));
    bars.push_back(b);
    line_of.push_back(line_no);
  }

  std::vector<std::size_t> order(bars.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bars[a].date < bars[b].date; });
  for (std::size_t i = 1; i < order.size(); ++i)
    if (bars[order[i]].date == bars[order[i - 1]].date)
      throw ValidationError(fmt::format("{}: duplicate date {} on lines {} and {}", instrument, bars[order[i]].date.iso(),
                                        line_of[order[i - 1]], line_of[order[i]]));

  return SeriesFrame(std::move(instrument), std::move(bars), !volume_col.has_value());
}

SeriesFrame load_ohlcv_csv(const std::filesystem::path& path, std::string instrument) {
  return parse_ohlcv_csv(io::read_text_file(path), std::move(instrument));
}

std::string to_csv(const SeriesFrame& frame) {
  std::string out = frame.volume_missing() ? "Date,Open,High,Low,Close\n" : "Date,Open,High,Low,Close,Volume\n";
  for (const auto& b : frame.rows()) {
    out += b.date.iso();
    for (double v : {b.open, b.high, b.low, b.close}) {
      out += ',';
      out += io::round_trip(v);
    }
    if (!frame.volume_missing()) {
      out += ',';
      out += io::round_trip(b.volume);
    }
    out += '\n';
  }
  return out;
}

std::size_t AlignedPanel::index_of(std::string_view label) const {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == label) return i;
  throw InputError(fmt::format("panel has no column '{}'", label));
}

void AlignedPanel::validate() const {
  if (columns.size() != labels.size()) throw InputError("panel label/column count mismatch");
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i].size() != dates.size())
      throw InputError(fmt::format("panel column '{}' has {} values for {} dates", labels[i], columns[i].size(), dates.size()));
  for (std::size_t i = 1; i < dates.size(); ++i)
    if (!(dates[i - 1] < dates[i])) throw InputError("panel dates are not strictly increasing at " + dates[i].iso());
}

AlignedPanel AlignedPanel::row_block(std::size_t first, std::size_t count) const {
  AlignedPanel out;
  out.labels = labels;
  out.dates.assign(dates.begin() + first, dates.begin() + first + count);
  for (const auto& c : columns) out.columns.emplace_back(c.begin() + first, c.begin() + first + count);
  return out;
}

AlignedPanel AlignedPanel::log_returns() const {
  if (rows() < 2) throw InputError("log returns need at least two dates");
  AlignedPanel out;
  out.labels = labels;
  out.dates.assign(dates.begin() + 1, dates.end());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    std::vector<double> r(rows() - 1);
    for (std::size_t t = 1; t < rows(); ++t) {
      if (columns[c][t] <= 0.0 || columns[c][t - 1] <= 0.0)
        throw DegenerateError(fmt::format("log returns of '{}' need positive values (date {})", labels[c], dates[t].iso()));
      r[t - 1] = std::log(columns[c][t] / columns[c][t - 1]);
    }
    out.columns.push_back(std::move(r));
  }
  return out;
}

AlignedPanel align_inner(std::span<const SeriesFrame> frames, Channel channel) {
  if (frames.size() < 2) throw InputError(fmt::format("alignment needs at least two instruments, got {}", frames.size()));

  std::vector<Date> common = frames.front().dates();
  for (std::size_t f = 1; f < frames.size(); ++f) {
    const auto other = frames[f].dates();
    std::vector<Date> next;
    std::set_intersection(common.begin(), common.end(), other.begin(), other.end(), std::back_inserter(next));
    common = std::move(next);
  }
  if (common.empty()) {
    std::string ranges;
    for (const auto& f : frames) ranges += (ranges.empty() ? "" : "; ") + date_range(f);
    throw AlignmentError("instruments share no trading dates (" + ranges + ")");
  }

  AlignedPanel panel;
  panel.dates = common;
  for (const auto& f : frames) {
    panel.labels.push_back(f.instrument());
    std::vector<double> col;
    col.reserve(common.size());
    std::size_t j = 0;
    for (const auto& b : f.rows()) {
      if (j < common.size() && b.date == common[j]) {
        col.push_back(b.get(channel));
        ++j;
      }
    }
    panel.columns.push_back(std::move(col));
  }
  return panel;
}

std::string to_csv(const AlignedPanel& panel) {
  std::string out = "Date";
  for (const auto& l : panel.labels) out += "," + l;
  out += '\n';
  for (std::size_t r = 0; r < panel.rows(); ++r) {
    out += panel.dates[r].iso();
    for (const auto& c : panel.columns) {
      out += ',';
      out += io::round_trip(c[r]);
    }
    out += '\n';
  }
  return out;
}

std::size_t split_point(std::size_t rows, double train_fraction) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw SplitError(fmt::format("train fraction must lie strictly between 0 and 1 (got {})", train_fraction));
  const auto head = static_cast<std::size_t>(std::floor(static_cast<double>(rows) * train_fraction));
  if (head == 0 || head == rows)
    throw SplitError(fmt::format("splitting {} rows at fraction {} leaves an empty {} part", rows, train_fraction,
                                 head == 0 ? "head" : "tail"));
  return head;
}

std::pair<AlignedPanel, AlignedPanel> chronological_split(const AlignedPanel& panel, double train_fraction) {
  const auto head = split_point(panel.rows(), train_fraction);
  return {panel.row_block(0, head), panel.row_block(head, panel.rows() - head)};
}

std::pair<DesignMatrix, DesignMatrix> chronological_split(const DesignMatrix& matrix, double train_fraction) {
  const auto head = split_point(matrix.rows(), train_fraction);
  return {matrix.row_block(0, head), matrix.row_block(head, matrix.rows() - head)};
}

}  // namespace lagcast
