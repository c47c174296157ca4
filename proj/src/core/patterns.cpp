#include "stpp/patterns.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>

#include <fmt/format.h>

#include "stpp/errors.hpp"

namespace stpp {

namespace {

constexpr double kDaysPerYear = 365.2425;

double days_per(TimeResolution resolution) {
  switch (resolution) {
    case TimeResolution::Year: return kDaysPerYear;
    case TimeResolution::Month: return kDaysPerYear / 12.0;
    case TimeResolution::Week: return 7.0;
    case TimeResolution::Day: return 1.0;
    case TimeResolution::Abstract: break;
  }
  throw ConfigError("calendar bins need a calendar time resolution, not 'abstract'");
}

double days_per(TimeBin bin) {
  switch (bin) {
    case TimeBin::Year: return kDaysPerYear;
    case TimeBin::Month: return kDaysPerYear / 12.0;
    case TimeBin::Week: return 7.0;
    case TimeBin::Day: return 1.0;
  }
  return 1.0;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string> split_row(std::string_view line, char delimiter) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        current += '"';
        ++k;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == delimiter) {
      fields.emplace_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  fields.emplace_back(trim(current));
  return fields;
}

std::size_t column_index(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw ConfigError(fmt::format("schema column '{}' not present in the table header", name));
  }
  return static_cast<std::size_t>(it - header.begin());
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

PointPattern::PointPattern(Window window, std::vector<Point> points)
    : window_(std::move(window)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!window_.contains(points_[i])) {
      throw DomainError(fmt::format("point {} ({}, {}) lies outside the window", i, points_[i].x,
                                    points_[i].y));
    }
  }
}

MarkedPattern::MarkedPattern(PointPattern base, std::vector<Mark> marks)
    : base_(std::move(base)), marks_(std::move(marks)) {
  if (marks_.size() != base_.size()) {
    throw DomainError(fmt::format("{} marks for {} points", marks_.size(), base_.size()));
  }
}

std::size_t MarkedPattern::count(Mark mark) const {
  return static_cast<std::size_t>(std::count(marks_.begin(), marks_.end(), mark));
}

STPattern::STPattern(PointPattern base, std::vector<double> times, TimeWindow time_window)
    : base_(std::move(base)), times_(std::move(times)), time_window_(time_window) {
  if (times_.size() != base_.size()) {
    throw DomainError(fmt::format("{} times for {} points", times_.size(), base_.size()));
  }
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (!time_window_.contains(times_[i])) {
      throw DomainError(fmt::format("event {} time {} lies outside [{}, {}]", i, times_[i],
                                    time_window_.start(), time_window_.end()));
    }
  }
}

const char* reject_reason_name(RejectReason reason) {
  switch (reason) {
    case RejectReason::OutOfWindow: return "out-of-window";
    case RejectReason::Unparseable: return "unparseable";
    case RejectReason::MissingField: return "missing-field";
  }
  return "unknown";
}

MarkedPattern EventTable::marked() const {
  if (!marks) throw ConfigError("event table has no label column");
  return MarkedPattern(pattern, *marks);
}

STPattern EventTable::spatio_temporal() const {
  if (!times || !time_window) throw ConfigError("event table has no time column");
  return STPattern(pattern, *times, *time_window);
}

EventTable ingest(std::istream& in, const IngestSchema& schema, const Window& window,
                  std::optional<TimeWindow> time_window) {
  std::string line;
  if (!std::getline(in, line)) throw EmptyPatternError("event table is empty");
  const char delimiter =
      schema.delimiter.value_or(line.find('\t') != std::string::npos ? '\t' : ',');
  const auto header = split_row(line, delimiter);

  const std::size_t ix = column_index(header, schema.x_column);
  const std::size_t iy = column_index(header, schema.y_column);
  std::optional<std::size_t> it, il;
  if (schema.t_column) it = column_index(header, *schema.t_column);
  if (schema.label_column) {
    il = column_index(header, *schema.label_column);
    if (schema.case_label == schema.control_label) {
      throw ConfigError("case and control labels must differ");
    }
  }

  IngestReport report;
  std::vector<Point> points;
  std::vector<Mark> marks;
  std::vector<double> times;
  std::set<std::pair<double, double>> seen;

  auto reject = [&](std::size_t line_no, RejectReason reason) {
    switch (reason) {
      case RejectReason::OutOfWindow: ++report.out_of_window; break;
      case RejectReason::Unparseable: ++report.unparseable; break;
      case RejectReason::MissingField: ++report.missing_field; break;
    }
    report.rejected.push_back({line_no, reason});
  };

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    ++report.rows_read;
    const auto fields = split_row(line, delimiter);
    auto cell = [&](std::size_t k) -> std::string_view {
      return k < fields.size() ? std::string_view(fields[k]) : std::string_view();
    };

    bool missing = cell(ix).empty() || cell(iy).empty();
    if (it && cell(*it).empty()) missing = true;
    if (il && cell(*il).empty()) missing = true;
    if (missing) {
      reject(line_no, RejectReason::MissingField);
      continue;
    }

    const auto x = parse_number(cell(ix));
    const auto y = parse_number(cell(iy));
    std::optional<double> t;
    if (it) t = schema.parse_time ? schema.parse_time(cell(*it)) : parse_number(cell(*it));
    std::optional<Mark> mark;
    if (il) {
      if (cell(*il) == schema.case_label) mark = Mark::Case;
      if (cell(*il) == schema.control_label) mark = Mark::Control;
    }
    if (!x || !y || (it && !t) || (il && !mark)) {
      reject(line_no, RejectReason::Unparseable);
      continue;
    }

    const Point p{*x, *y};
    if (!window.contains(p) || (t && time_window && !time_window->contains(*t))) {
      reject(line_no, RejectReason::OutOfWindow);
      continue;
    }

    if (!seen.insert({p.x, p.y}).second) ++report.duplicate_count;
    points.push_back(p);
    if (t) times.push_back(*t);
    if (mark) marks.push_back(*mark);
  }

  report.rows_accepted = points.size();
  if (points.empty()) {
    throw EmptyPatternError(
        fmt::format("no rows accepted out of {} read ({} out of window, {} unparseable, {} "
                    "missing a field)",
                    report.rows_read, report.out_of_window, report.unparseable,
                    report.missing_field));
  }

  if (it && !time_window) {
    const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
    if (!(*hi > *lo)) {
      throw ConfigError("cannot infer a time window from a single distinct event time");
    }
    time_window = TimeWindow(*lo, *hi);
  }

  EventTable table{PointPattern(window, std::move(points)), std::nullopt, std::nullopt,
                   std::nullopt, std::move(report)};
  if (il) table.marks = std::move(marks);
  if (it) {
    table.times = std::move(times);
    table.time_window = time_window;
  }
  return table;
}

void export_table(std::ostream& out, std::span<const Point> points, std::span<const double> times,
                  std::span<const Mark> marks, const std::string& case_label,
                  const std::string& control_label) {
  out << "x,y";
  if (!times.empty()) out << ",t";
  if (!marks.empty()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    out << format_number(points[i].x) << ',' << format_number(points[i].y);
    if (!times.empty()) out << ',' << format_number(times[i]);
    if (!marks.empty()) out << ',' << (marks[i] == Mark::Case ? case_label : control_label);
    out << '\n';
  }
}

void export_table(std::ostream& out, const PointPattern& pattern) {
  export_table(out, pattern.points());
}

void export_table(std::ostream& out, const MarkedPattern& pattern) {
  export_table(out, pattern.points(), {}, pattern.marks());
}

void export_table(std::ostream& out, const STPattern& pattern) {
  export_table(out, pattern.points(), pattern.times());
}

std::pair<PointPattern, PointPattern> split_marks(const MarkedPattern& pattern) {
  std::vector<Point> cases, controls;
  const auto points = pattern.points();
  const auto marks = pattern.marks();
  for (std::size_t i = 0; i < points.size(); ++i) {
    (marks[i] == Mark::Case ? cases : controls).push_back(points[i]);
  }
  if (cases.empty() || controls.empty()) {
    throw InsufficientDataError(fmt::format(
        "split needs both classes; got {} cases and {} controls", cases.size(), controls.size()));
  }
  return {PointPattern(pattern.window(), std::move(cases)),
          PointPattern(pattern.window(), std::move(controls))};
}

const char* time_bin_name(TimeBin bin) {
  switch (bin) {
    case TimeBin::Year: return "year";
    case TimeBin::Month: return "month";
    case TimeBin::Week: return "week";
    case TimeBin::Day: return "day";
  }
  return "day";
}

TimeBin parse_time_bin(const std::string& text) {
  if (text == "year") return TimeBin::Year;
  if (text == "month") return TimeBin::Month;
  if (text == "week") return TimeBin::Week;
  if (text == "day") return TimeBin::Day;
  throw ConfigError(fmt::format("unknown time bin '{}'", text));
}

double time_bin_width(TimeBin bin, TimeResolution resolution) {
  return days_per(bin) / days_per(resolution);
}

TemporalHistogram temporal_histogram(const STPattern& pattern, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    throw ConfigError("histogram bin width must be positive");
  }
  TemporalHistogram hist;
  hist.bin_width = bin_width;
  if (pattern.size() == 0) return hist;

  const TimeWindow& tw = pattern.time_window();
  std::size_t n_bins = 1;
  if (bin_width > tw.length()) {
    hist.warnings.push_back(fmt::format(
        "bin width {} exceeds the time window length {}; using a single bin", bin_width,
        tw.length()));
  } else {
    n_bins = static_cast<std::size_t>(std::ceil(tw.length() / bin_width));
  }
  hist.bins.resize(n_bins);
  for (std::size_t b = 0; b < n_bins; ++b) hist.bins[b].index = b;
  for (double t : pattern.times()) {
    const auto raw = static_cast<std::size_t>(std::floor((t - tw.start()) / bin_width));
    ++hist.bins[std::min(raw, n_bins - 1)].count;
  }
  return hist;
}

TemporalHistogram temporal_histogram(const STPattern& pattern, TimeBin bin) {
  return temporal_histogram(pattern, time_bin_width(bin, pattern.time_window().resolution()));
}

}  // namespace stpp
