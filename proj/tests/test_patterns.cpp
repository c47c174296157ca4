#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/patterns.hpp"
#include "stpp/random.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);

std::vector<Point> random_points(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<Point> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({rng.uniform(), rng.uniform()});
  return out;
}

}  // namespace

TEST_CASE("patterns reject points outside the window") {
  CHECK_THROWS_AS(PointPattern(kUnit, {{0.5, 0.5}, {1.5, 0.5}}), DomainError);
  CHECK_NOTHROW(PointPattern(kUnit, {{0, 0}, {1, 1}}));
  CHECK(PointPattern(kUnit, {}).empty());
  CHECK_THROWS_AS(MarkedPattern(PointPattern(kUnit, {{0.1, 0.1}}), {}), DataError);
  CHECK_THROWS_AS(STPattern(PointPattern(kUnit, {{0.1, 0.1}}), {11.0}, TimeWindow(0, 10)),
                  DomainError);
}

TEST_CASE("ingest: out-of-window rows are rejected and counted") {
  std::istringstream in("x,y\n0.1,0.2\n0.3,0.4\n0.5,0.6\n2,0.5\n");
  const EventTable table = ingest(in, {}, kUnit);
  CHECK(table.pattern.size() == 3);
  CHECK(table.report.rows_read == 4);
  CHECK(table.report.rows_accepted == 3);
  CHECK(table.report.out_of_window == 1);
  CHECK(table.report.rows_rejected() == 1);
  REQUIRE(table.report.rejected.size() == 1);
  CHECK(table.report.rejected[0].reason == RejectReason::OutOfWindow);
  CHECK(table.report.rejected[0].line == 5);
}

TEST_CASE("ingest: schema asking for a missing column is a config error") {
  std::istringstream in("x,y\n0.1,0.2\n");
  IngestSchema schema;
  schema.t_column = "t";
  CHECK_THROWS_AS(ingest(in, schema, kUnit), ConfigError);
}

TEST_CASE("ingest: duplicates are retained and counted") {
  std::istringstream in("x,y\n0.25,0.5\n0.25,0.5\n");
  const EventTable table = ingest(in, {}, kUnit);
  CHECK(table.pattern.size() == 2);
  CHECK(table.report.duplicate_count == 1);
}

TEST_CASE("ingest: unparseable and missing fields, empty result") {
  std::istringstream in("x\ty\tlabel\n0.1\tabc\tcase\n0.2\n0.3\t0.3\tcase\n0.4\t0.4\tcontrol\n");
  IngestSchema schema;
  schema.label_column = "label";
  const EventTable table = ingest(in, schema, kUnit);
  CHECK(table.report.unparseable == 1);
  CHECK(table.report.missing_field == 1);
  CHECK(table.report.rows_read == table.report.rows_accepted + table.report.rows_rejected());
  const MarkedPattern marked = table.marked();
  CHECK(marked.count(Mark::Case) == 1);
  CHECK(marked.count(Mark::Control) == 1);

  std::istringstream none("x,y\n5,5\n");
  CHECK_THROWS_AS(ingest(none, {}, kUnit), EmptyPatternError);

  std::istringstream bad_label("x,y,label\n0.1,0.1,maybe\n0.2,0.2,case\n");
  const EventTable partial = ingest(bad_label, schema, kUnit);
  CHECK(partial.report.unparseable == 1);
}

TEST_CASE("ingest: time window filtering and inference") {
  IngestSchema schema;
  schema.t_column = "t";
  std::istringstream in("x,y,t\n0.1,0.1,1\n0.2,0.2,4\n0.3,0.3,12\n");
  const EventTable table = ingest(in, schema, kUnit, TimeWindow(0, 10));
  CHECK(table.pattern.size() == 2);
  CHECK(table.report.out_of_window == 1);

  std::istringstream in2("x,y,t\n0.1,0.1,1\n0.2,0.2,4\n");
  const STPattern st = ingest(in2, schema, kUnit).spatio_temporal();
  CHECK(st.time_window().start() == 1.0);
  CHECK(st.time_window().end() == 4.0);
}

TEST_CASE("export then ingest reproduces coordinates bit for bit") {
  RandomStream rng(77);
  std::vector<Point> pts;
  std::vector<double> times;
  std::vector<Mark> marks;
  for (int i = 0; i < 200; ++i) {
    pts.push_back({rng.uniform() * 1e3 - 500, std::ldexp(rng.uniform(), -30)});
    times.push_back(rng.uniform(0, 365.25));
    marks.push_back(rng.below(2) ? Mark::Case : Mark::Control);
  }
  const Window w = Window::rectangle(-500, 0, 500, 1);
  std::ostringstream out;
  export_table(out, pts, times, marks);
  std::istringstream in(out.str());
  IngestSchema schema;
  schema.t_column = "t";
  schema.label_column = "label";
  const EventTable table = ingest(in, schema, w, TimeWindow(0, 365.25));
  REQUIRE(table.pattern.size() == pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(table.pattern[i].x == pts[i].x);
    CHECK(table.pattern[i].y == pts[i].y);
    CHECK((*table.times)[i] == times[i]);
    CHECK((*table.marks)[i] == marks[i]);
  }
}

TEST_CASE("split_marks") {
  const auto pts = random_points(10, 3);
  std::vector<Mark> marks(10, Mark::Control);
  for (int i : {1, 4, 5, 8}) marks[static_cast<std::size_t>(i)] = Mark::Case;
  const MarkedPattern marked(PointPattern(kUnit, pts), marks);
  const auto [cases, controls] = split_marks(marked);
  CHECK(cases.size() == 4);
  CHECK(controls.size() == 6);
  CHECK(cases.window().area() == kUnit.area());

  std::vector<Point> merged(cases.points().begin(), cases.points().end());
  merged.insert(merged.end(), controls.points().begin(), controls.points().end());
  auto key = [](std::vector<Point> v) {
    std::sort(v.begin(), v.end(), [](Point a, Point b) { return std::tie(a.x, a.y) < std::tie(b.x, b.y); });
    return v;
  };
  const auto a = key(merged);
  const auto b = key(pts);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }

  const MarkedPattern all_case(PointPattern(kUnit, pts), std::vector<Mark>(10, Mark::Case));
  CHECK_THROWS_AS(split_marks(all_case), InsufficientDataError);
}

TEST_CASE("temporal histogram: trivial cases") {
  const auto pts = random_points(5, 1);
  const STPattern five(PointPattern(kUnit, pts), {0.1, 0.2, 0.3, 0.4, 0.5}, TimeWindow(0, 10));
  const TemporalHistogram one_bin = temporal_histogram(five, 1.0);
  REQUIRE(!one_bin.bins.empty());
  CHECK(one_bin.bins[0] == HistogramBin{0, 5});
  std::size_t total = 0;
  for (const auto& b : one_bin.bins) total += b.count;
  CHECK(total == 5);
  CHECK(one_bin.bins.size() == 10);

  const TemporalHistogram wide = temporal_histogram(five, 50.0);
  CHECK(wide.bins.size() == 1);
  CHECK(wide.bins[0].count == 5);
  CHECK(!wide.warnings.empty());

  const STPattern empty(PointPattern(kUnit, {}), {}, TimeWindow(0, 10));
  CHECK(temporal_histogram(empty, 1.0).bins.empty());
  CHECK_THROWS_AS(temporal_histogram(five, 0.0), ConfigError);
}

TEST_CASE("temporal histogram: uniform months stay within 3 sigma") {
  // 1200 uniform times over one year of days, 12 month bins.
  const double year = 365.2425;
  const STPattern base_window(PointPattern(kUnit, {}), {}, TimeWindow(0, year, TimeResolution::Day));
  RandomStream rng(2718);
  const auto pts = random_points(1200, 4);
  std::vector<double> times;
  for (int i = 0; i < 1200; ++i) times.push_back(rng.uniform(0, year));
  const STPattern st(PointPattern(kUnit, pts), times, TimeWindow(0, year, TimeResolution::Day));
  const TemporalHistogram h = temporal_histogram(st, TimeBin::Month);
  REQUIRE(h.bins.size() == 12);
  const double sigma = std::sqrt(1200.0 * (1.0 / 12) * (11.0 / 12));
  for (const auto& b : h.bins) CHECK(std::abs(static_cast<double>(b.count) - 100.0) <= 3 * sigma);

  // Event order does not matter.
  std::vector<std::size_t> order(1200);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Point> p2;
  std::vector<double> t2;
  for (auto k : order) {
    p2.push_back(pts[k]);
    t2.push_back(times[k]);
  }
  const STPattern shuffled(PointPattern(kUnit, p2), t2, TimeWindow(0, year, TimeResolution::Day));
  CHECK(temporal_histogram(shuffled, TimeBin::Month).bins == h.bins);

  CHECK_THROWS_AS(time_bin_width(TimeBin::Year, TimeResolution::Abstract), ConfigError);
  CHECK(time_bin_width(TimeBin::Week, TimeResolution::Day) == 7.0);
}

TEST_CASE("number formatting round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    const auto parsed = parse_number(format_number(v));
    REQUIRE(parsed.has_value());
    CHECK(*parsed == v);
  }
  CHECK_FALSE(parse_number("1.0x").has_value());
  CHECK_FALSE(parse_number("").has_value());
}
