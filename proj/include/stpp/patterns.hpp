#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "stpp/geometry.hpp"

namespace stpp {

// Event locations inside a window. Duplicates are allowed; K estimators are
// defined on multisets.
class PointPattern {
 public:
  // Throws DomainError if any point falls outside the (closed) window.
  PointPattern(Window window, std::vector<Point> points);

  const Window& window() const { return window_; }
  std::span<const Point> points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const Point& operator[](std::size_t i) const { return points_[i]; }

 private:
  Window window_;
  std::vector<Point> points_;
};

enum class Mark : std::uint8_t { Case, Control };

class MarkedPattern {
 public:
  MarkedPattern(PointPattern base, std::vector<Mark> marks);

  const PointPattern& base() const { return base_; }
  const Window& window() const { return base_.window(); }
  std::span<const Point> points() const { return base_.points(); }
  std::span<const Mark> marks() const { return marks_; }
  std::size_t size() const { return base_.size(); }
  std::size_t count(Mark mark) const;

 private:
  PointPattern base_;
  std::vector<Mark> marks_;
};

class STPattern {
 public:
  // Throws DomainError if a time falls outside the time window.
  STPattern(PointPattern base, std::vector<double> times, TimeWindow time_window);

  const PointPattern& base() const { return base_; }
  const Window& window() const { return base_.window(); }
  std::span<const Point> points() const { return base_.points(); }
  std::span<const double> times() const { return times_; }
  const TimeWindow& time_window() const { return time_window_; }
  std::size_t size() const { return base_.size(); }

 private:
  PointPattern base_;
  std::vector<double> times_;
  TimeWindow time_window_;
};

inline std::vector<PairSeparation> pairwise_separations(const STPattern& pattern) {
  return pairwise_separations(pattern.points(), pattern.times());
}

// ---------------------------------------------------------------------------
// Ingestion of delimited event tables.

struct IngestSchema {
  std::string x_column = "x";
  std::string y_column = "y";
  std::optional<std::string> t_column;
  std::optional<std::string> label_column;
  std::string case_label = "case";
  std::string control_label = "control";
  // Autodetected from the header (tab if present, else comma) when unset.
  std::optional<char> delimiter;
  // Converts a time cell to an offset; defaults to plain decimal parsing.
  std::function<std::optional<double>(std::string_view)> parse_time;
};

enum class RejectReason { OutOfWindow, Unparseable, MissingField };

const char* reject_reason_name(RejectReason reason);

struct RejectedRow {
  std::size_t line = 0;  // 1-based, header is line 1
  RejectReason reason = RejectReason::Unparseable;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t out_of_window = 0;
  std::size_t unparseable = 0;
  std::size_t missing_field = 0;
  std::size_t duplicate_count = 0;
  std::vector<RejectedRow> rejected;

  std::size_t rows_rejected() const { return out_of_window + unparseable + missing_field; }
};

struct EventTable {
  PointPattern pattern;
  std::optional<std::vector<Mark>> marks;
  std::optional<std::vector<double>> times;
  std::optional<TimeWindow> time_window;
  IngestReport report;

  // Throw ConfigError when the table was read without labels / times.
  MarkedPattern marked() const;
  STPattern spatio_temporal() const;
};

// Reads one event per row. Rows outside the window (or outside the time
// window, when one is given) are rejected and counted; duplicates are kept.
// Without a time window the observed time range is used.
EventTable ingest(std::istream& in, const IngestSchema& schema, const Window& window,
                  std::optional<TimeWindow> time_window = std::nullopt);

// Writes x,y[,t][,label] with shortest round-trip number formatting, so
// ingest(export(p)) reproduces p bit for bit.
void export_table(std::ostream& out, std::span<const Point> points,
                  std::span<const double> times = {}, std::span<const Mark> marks = {},
                  const std::string& case_label = "case",
                  const std::string& control_label = "control");
void export_table(std::ostream& out, const PointPattern& pattern);
void export_table(std::ostream& out, const MarkedPattern& pattern);
void export_table(std::ostream& out, const STPattern& pattern);

// Throws InsufficientDataError unless both classes are present.
std::pair<PointPattern, PointPattern> split_marks(const MarkedPattern& pattern);

// ---------------------------------------------------------------------------
// Temporal frequency histogram.

enum class TimeBin { Year, Month, Week, Day };

const char* time_bin_name(TimeBin bin);
TimeBin parse_time_bin(const std::string& text);

// Width of one bin in the units of `resolution`. Throws ConfigError for
// abstract time units, which have no calendar meaning.
double time_bin_width(TimeBin bin, TimeResolution resolution);

struct HistogramBin {
  std::size_t index = 0;
  std::size_t count = 0;
  friend bool operator==(const HistogramBin&, const HistogramBin&) = default;
};

struct TemporalHistogram {
  double bin_width = 0.0;
  std::vector<HistogramBin> bins;  // consecutive, covering the time window
  std::vector<std::string> warnings;
};

TemporalHistogram temporal_histogram(const STPattern& pattern, double bin_width);
TemporalHistogram temporal_histogram(const STPattern& pattern, TimeBin bin);

// Shortest decimal representation that parses back to the same double.
std::string format_number(double value);
std::optional<double> parse_number(std::string_view text);

}  // namespace stpp
