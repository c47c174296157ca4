#include "pipelines.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "calendar.hpp"
#include "stpp/errors.hpp"
#include "stpp/synth.hpp"
#include "svg.hpp"
#include "validation.hpp"

namespace stpp::app {

const char* const kToolVersion = "1.0.0";

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v) { return std::isnan(v) ? "NA" : format_number(v); }

// Writes files below the output root and records them in the manifest.
class Outputs {
 public:
  Outputs(fs::path root, RunManifest& manifest) : root_(std::move(root)), manifest_(manifest) {}

  void write(const std::string& relative, const std::string& content) {
    const fs::path path = root_ / relative;
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot write '{}'", path.string()));
    out << content;
    if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
    manifest_.outputs.push_back({relative, content.size(), fnv1a_hex(content)});
  }

  const fs::path& root() const { return root_; }

 private:
  fs::path root_;
  RunManifest& manifest_;
};

// One unit of analysis: the whole data set or one calendar stratum.
struct Slice {
  std::string label;
  std::string prefix;  // output path prefix, empty or "<label>/"
  PointPattern points;
  std::optional<std::vector<Mark>> marks;
  std::optional<std::vector<double>> times;
  std::optional<TimeWindow> time_window;

  std::string name(const std::string& file) const { return prefix + file; }
  std::string where() const { return label.empty() ? "" : fmt::format("stratum {}: ", label); }
};

struct Context {
  const AnalysisConfig& cfg;
  Pipeline pipeline;
  unsigned threads;
  std::optional<std::uint64_t> seed;
  Outputs& out;
  RunManifest& manifest;

  std::uint64_t require_seed() const {
    if (!seed) {
      throw ConfigError(fmt::format("pipeline {} is a Monte Carlo analysis and needs a seed",
                                    pipeline_name(pipeline)));
    }
    return *seed;
  }
  void warn(const Slice& slice, const std::string& message) const {
    manifest.warnings.push_back(slice.where() + message);
  }
};

std::string capture(const auto& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::vector<std::size_t> subset_rows(const Slice& slice, Subset subset) {
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < slice.points.size(); ++i) {
    if (subset == Subset::All || !slice.marks) {
      rows.push_back(i);
      continue;
    }
    const Mark m = (*slice.marks)[i];
    if ((subset == Subset::Cases) == (m == Mark::Case)) rows.push_back(i);
  }
  return rows;
}

PointPattern spatial(const Slice& slice, Subset subset) {
  std::vector<Point> pts;
  for (std::size_t i : subset_rows(slice, subset)) pts.push_back(slice.points[i]);
  return PointPattern(slice.points.window(), std::move(pts));
}

STPattern spatio_temporal(const Context& ctx, const Slice& slice) {
  if (!slice.times || !slice.time_window) {
    throw ConfigError(fmt::format("pipeline {} needs event times (t_column)", pipeline_name(ctx.pipeline)));
  }
  std::vector<Point> pts;
  std::vector<double> times;
  for (std::size_t i : subset_rows(slice, ctx.cfg.subset)) {
    pts.push_back(slice.points[i]);
    times.push_back((*slice.times)[i]);
  }
  return STPattern(PointPattern(slice.points.window(), std::move(pts)), std::move(times), *slice.time_window);
}

MarkedPattern marked(const Context& ctx, const Slice& slice) {
  if (!slice.marks) {
    throw ConfigError(fmt::format("pipeline {} needs case/control labels (label_column)",
                                  pipeline_name(ctx.pipeline)));
  }
  return MarkedPattern(slice.points, *slice.marks);
}

DistanceGrid s_grid(const AnalysisConfig& cfg, const Window& window) {
  if (cfg.s_values) {
    DistanceGrid g(*cfg.s_values);
    check_distance_grid(g, window);
    return g;
  }
  if (cfg.s_max) {
    DistanceGrid g = DistanceGrid::uniform(*cfg.s_max, cfg.s_count);
    check_distance_grid(g, window);
    return g;
  }
  return default_distance_grid(window, cfg.s_count);
}

LagGrid t_grid(const AnalysisConfig& cfg, const TimeWindow& tw) {
  LagGrid g = cfg.t_values ? LagGrid(*cfg.t_values)
                           : LagGrid::uniform(cfg.t_max.value_or(0.5 * tw.length()), cfg.t_count);
  if (g.max() > tw.length()) {
    throw ConfigError(fmt::format("time lags up to {} exceed the time window length {}", format_number(g.max()),
                                  format_number(tw.length())));
  }
  return g;
}

void note_clamps(const Context& ctx, const Slice& slice, const FunctionEstimate& f) {
  if (f.info.clamped_weights > 0) {
    ctx.warn(slice, fmt::format("{}: {} edge weights clamped at {} (circle almost entirely outside the window)",
                                f.info.estimator, f.info.clamped_weights, format_number(1.0 / kMinArcProportion)));
  }
}

svg::HeatMap st_heat_map(const STGrid& g, std::string title, bool annotate) {
  svg::HeatMap map;
  map.title = std::move(title);
  map.x_label = "distance s";
  map.y_label = "time lag t";
  map.x.assign(g.s().values().begin(), g.s().values().end());
  map.y.assign(g.t().values().begin(), g.t().values().end());
  map.values.resize(g.rows() * g.cols());
  for (std::size_t is = 0; is < g.rows(); ++is) {
    for (std::size_t it = 0; it < g.cols(); ++it) map.values[it * g.rows() + is] = g.at(is, it);
  }
  map.annotate = annotate;
  return map;
}

// Block-averages a raster down to at most `limit` cells per side for display.
svg::HeatMap raster_heat_map(const Raster& r, std::string title) {
  constexpr std::size_t limit = 96;
  const std::size_t bx = (r.nx() + limit - 1) / limit;
  const std::size_t by = (r.ny() + limit - 1) / limit;
  const std::size_t nx = (r.nx() + bx - 1) / bx;
  const std::size_t ny = (r.ny() + by - 1) / by;
  svg::HeatMap map;
  map.title = std::move(title);
  map.x_label = "x";
  map.y_label = "y";
  for (std::size_t ix = 0; ix < nx; ++ix) {
    map.x.push_back(r.extent().x_min + (static_cast<double>(ix) + 0.5) * r.extent().width() / static_cast<double>(nx));
  }
  for (std::size_t iy = 0; iy < ny; ++iy) {
    map.y.push_back(r.extent().y_min + (static_cast<double>(iy) + 0.5) * r.extent().height() / static_cast<double>(ny));
  }
  map.values.assign(nx * ny, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t iy = 0; iy < ny; ++iy) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      double sum = 0;
      std::size_t count = 0;
      for (std::size_t y = iy * by; y < std::min(r.ny(), (iy + 1) * by); ++y) {
        for (std::size_t x = ix * bx; x < std::min(r.nx(), (ix + 1) * bx); ++x) {
          if (!r.defined(x, y)) continue;
          sum += r.at(x, y);
          ++count;
        }
      }
      if (count > 0) map.values[iy * nx + ix] = sum / static_cast<double>(count);
    }
  }
  return map;
}

std::string points_svg(const Slice& slice, const std::string& title) {
  svg::PointMap map{title, slice.points.window(), {}};
  if (slice.marks) {
    svg::PointGroup cases{"cases", {}, "#c0392b"};
    svg::PointGroup controls{"controls", {}, "#2c7fb8"};
    for (std::size_t i = 0; i < slice.points.size(); ++i) {
      ((*slice.marks)[i] == Mark::Case ? cases : controls).points.push_back(slice.points[i]);
    }
    map.groups = {controls, cases};
  } else {
    map.groups = {{"events", {slice.points.points().begin(), slice.points.points().end()}, "#1f3b73"}};
  }
  return svg::render(map);
}

std::vector<double> zeros(std::size_t n) { return std::vector<double>(n, 0.0); }

// ---------------------------------------------------------------------------
// Pipelines

Json run_intensity(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  if (!cfg.bandwidth) throw ConfigError("pipeline intensity needs a bandwidth");
  Json result;
  auto emit = [&](const std::string& name, const PointPattern& p) {
    IntensitySurface s = intensity_estimate(p, *cfg.bandwidth, cfg.grid, cfg.kernel);
    for (const auto& w : s.warnings) ctx.warn(slice, fmt::format("{}: {}", name, w));
    ctx.out.write(slice.name(name + ".csv"), capture([&](std::ostream& os) {
                    write_raster(os, s.raster, s.bandwidth, kernel_variant_name(s.variant));
                  }));
    ctx.out.write(slice.name(name + ".svg"),
                  svg::render(raster_heat_map(s.raster, fmt::format("{} (h = {}, {})", name,
                                                                    format_number(*cfg.bandwidth),
                                                                    kernel_variant_name(cfg.kernel)))));
    result[name] = {{"n", p.size()}, {"integral", integrate(s.raster)}};
    return s;
  };
  if (slice.marks && cfg.subset == Subset::All) {
    const IntensitySurface cases = emit("intensity_cases", spatial(slice, Subset::Cases));
    const IntensitySurface controls = emit("intensity_controls", spatial(slice, Subset::Controls));
    const Raster ratio = intensity_ratio(cases, controls, cfg.ratio_floor);
    std::size_t undefined = 0;
    for (double v : ratio.values()) undefined += std::isnan(v);
    ctx.out.write(slice.name("intensity_ratio.csv"), capture([&](std::ostream& os) {
                    write_raster(os, ratio, *cfg.bandwidth, kernel_variant_name(cfg.kernel));
                  }));
    svg::HeatMap ratio_map = raster_heat_map(ratio, "intensity ratio cases / controls");
    std::vector<double> finite;
    for (double v : ratio_map.values) {
      if (std::isfinite(v)) finite.push_back(v);
    }
    if (!finite.empty()) {
      // colour scale stops at the 95th percentile
      const auto q = finite.begin() + static_cast<std::ptrdiff_t>(0.95 * static_cast<double>(finite.size() - 1));
      std::nth_element(finite.begin(), q, finite.end());
      ratio_map.color_max = *q;
    }
    ctx.out.write(slice.name("intensity_ratio.svg"), svg::render(ratio_map));
    result["ratio_no_data_cells"] = undefined;
    if (undefined > 0) {
      ctx.warn(slice, fmt::format("intensity ratio: {} cells with control intensity below {} set to no-data",
                                  undefined, format_number(cfg.ratio_floor)));
    }
  } else {
    emit("intensity", spatial(slice, cfg.subset));
  }
  ctx.out.write(slice.name("points.svg"), points_svg(slice, "events"));
  return result;
}

Json run_csr_l(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const PointPattern p = spatial(slice, cfg.subset);
  const DistanceGrid g = s_grid(cfg, p.window());
  EnvelopeOptions opt{cfg.envelope_replicates, cfg.csr_level, ctx.require_seed(), ctx.threads, cfg.normalization};
  const EnvelopeResult env = csr_envelope(p, g, CsrStatistic::LMinusS, opt);
  note_clamps(ctx, slice, env.observed);
  FunctionEstimate table = env.observed;
  table.envelope = env.rank_band;
  table.theoretical = zeros(g.size());
  ctx.out.write(slice.name("l_hat.csv"), capture([&](std::ostream& os) { write_function_table(os, table); }));

  const std::vector<double> s(g.values().begin(), g.values().end());
  svg::LinePlot plot{fmt::format("L(s) - s with {}% CSR envelope ({} simulations)",
                                 format_number(100 * cfg.csr_level), cfg.envelope_replicates),
                     "distance s", "L(s) - s", {}};
  plot.series.push_back({"estimate", s, env.observed.values, svg::Stroke::Solid, "#1f3b73"});
  plot.series.push_back({"CSR", s, zeros(s.size()), svg::Stroke::Dotted, "#000000"});
  plot.series.push_back({"envelope", s, env.rank_band.upper, svg::Stroke::Dashed, "#c0392b"});
  plot.series.push_back({"", s, env.rank_band.lower, svg::Stroke::Dashed, "#c0392b"});
  ctx.out.write(slice.name("l_plot.svg"), svg::render(plot));

  std::size_t above = 0, below = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    above += env.observed.values[i] > env.rank_band.upper[i];
    below += env.observed.values[i] < env.rank_band.lower[i];
  }
  return {{"n", p.size()}, {"grid_points", g.size()}, {"above_envelope", above}, {"below_envelope", below}};
}

Json run_diggle_d(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const MarkedPattern m = marked(ctx, slice);
  const DistanceGrid g = s_grid(cfg, m.window());
  EnvelopeOptions opt{cfg.envelope_replicates, cfg.envelope_level, ctx.require_seed(), ctx.threads,
                      cfg.normalization};
  const EnvelopeResult env = rl_envelope(m, g, LabelStatistic::DHat, opt);
  const auto [cases, controls] = split_marks(m);
  const FunctionEstimate k1 = k_hat(cases, g, cfg.normalization);
  const FunctionEstimate k2 = k_hat(controls, g, cfg.normalization);
  note_clamps(ctx, slice, k1);
  note_clamps(ctx, slice, k2);

  FunctionEstimate table = env.observed;
  table.envelope = env.rank_band;
  table.theoretical = zeros(g.size());
  ctx.out.write(slice.name("d_hat.csv"), capture([&](std::ostream& os) { write_function_table(os, table); }));

  std::string envelope = "s,rank_lower,rank_upper,se_lower,se_upper,replicate_mean,replicate_sd\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    envelope += fmt::format("{},{},{},{},{},{},{}\n", num(g[i]), num(env.rank_band.lower[i]),
                            num(env.rank_band.upper[i]), num(env.se_band.lower[i]), num(env.se_band.upper[i]),
                            num(env.replicate_mean[i]), num(env.replicate_sd[i]));
  }
  ctx.out.write(slice.name("d_envelope.csv"), envelope);

  const std::vector<double> s(g.values().begin(), g.values().end());
  svg::LinePlot plot{fmt::format("D(s) = K cases - K controls, random labeling ({} relabelings)",
                                 cfg.envelope_replicates),
                     "distance s", "D(s)", {}};
  plot.series.push_back({"D(s)", s, env.observed.values, svg::Stroke::Solid, "#1f3b73"});
  plot.series.push_back({"zero", s, zeros(s.size()), svg::Stroke::Dotted, "#000000"});
  plot.series.push_back({"+-2 SE", s, env.se_band.upper, svg::Stroke::Dashed, "#c0392b"});
  plot.series.push_back({"", s, env.se_band.lower, svg::Stroke::Dashed, "#c0392b"});
  plot.series.push_back({fmt::format("{}% envelope", format_number(100 * cfg.envelope_level)), s,
                         env.rank_band.upper, svg::Stroke::Dashed, "#7f7f7f"});
  plot.series.push_back({"", s, env.rank_band.lower, svg::Stroke::Dashed, "#7f7f7f"});
  ctx.out.write(slice.name("d_plot.svg"), svg::render(plot));

  std::string kt = "s,k_cases,k_controls,theoretical\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    kt += fmt::format("{},{},{},{}\n", num(g[i]), num(k1.values[i]), num(k2.values[i]),
                      num(std::numbers::pi * g[i] * g[i]));
  }
  ctx.out.write(slice.name("k_classes.csv"), kt);
  svg::LinePlot kplot{"K(s) by class", "distance s", "K(s)", {}};
  kplot.series.push_back({"cases", s, k1.values, svg::Stroke::Solid, "#c0392b"});
  kplot.series.push_back({"controls", s, k2.values, svg::Stroke::Solid, "#2c7fb8"});
  kplot.series.push_back({"pi s^2", s, *k1.theoretical, svg::Stroke::Dotted, "#000000"});
  ctx.out.write(slice.name("k_plot.svg"), svg::render(kplot));

  std::size_t above = 0, below = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    above += env.observed.values[i] > env.rank_band.upper[i];
    below += env.observed.values[i] < env.rank_band.lower[i];
  }
  return {{"cases", cases.size()},
          {"controls", controls.size()},
          {"grid_points", g.size()},
          {"above_envelope", above},
          {"below_envelope", below}};
}

std::string bin_label(const AnalysisConfig& cfg, TimeBin bin, double mid) {
  const auto day = std::chrono::sys_days{std::chrono::days{static_cast<long long>(
      std::floor(cfg.epoch_days + mid * days_per_unit(cfg.time_unit)))}};
  const std::string date = format_date(day);
  switch (bin) {
    case TimeBin::Year: return date.substr(0, 4);
    case TimeBin::Month: return date.substr(0, 7);
    case TimeBin::Week: {
      const IsoWeek w = iso_week(day);
      return fmt::format("{}-W{:02}", w.year, w.week);
    }
    case TimeBin::Day: return date;
  }
  return date;
}

Json run_temporal_hist(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const STPattern p = spatio_temporal(ctx, slice);
  std::optional<TimeBin> bin = cfg.hist_bin;
  if (!bin && !cfg.hist_width && cfg.time_unit != TimeResolution::Abstract) {
    // one calendar level below the stratum length
    bin = cfg.stratify == Stratify::Month || cfg.stratify == Stratify::Week ? TimeBin::Day : TimeBin::Month;
  }
  const TemporalHistogram h = bin ? temporal_histogram(p, *bin)
                                  : temporal_histogram(p, cfg.hist_width.value_or(p.time_window().length() / 10));
  for (const auto& w : h.warnings) ctx.warn(slice, w);
  std::string table = "bin,start,end,count,label\n";
  svg::BarChart chart{"event frequency", bin ? time_bin_name(*bin) : "time bin", "events", {}, {}};
  const double start = p.time_window().start();
  for (const auto& b : h.bins) {
    const double lo = start + h.bin_width * static_cast<double>(b.index);
    const double hi = std::min(p.time_window().end(), lo + h.bin_width);
    const std::string label =
        bin && cfg.has_calendar ? bin_label(cfg, *bin, 0.5 * (lo + hi)) : format_number(lo);
    table += fmt::format("{},{},{},{},{}\n", b.index, num(lo), num(hi), b.count, label);
    chart.labels.push_back(label);
    chart.heights.push_back(static_cast<double>(b.count));
  }
  ctx.out.write(slice.name("histogram.csv"), table);
  ctx.out.write(slice.name("histogram.svg"), svg::render(chart));
  return {{"n", p.size()}, {"bins", h.bins.size()}, {"bin_width", h.bin_width}};
}

Json run_temporal_k(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const STPattern p = spatio_temporal(ctx, slice);
  const LagGrid t = t_grid(cfg, p.time_window());
  EnvelopeOptions opt{cfg.envelope_replicates, cfg.envelope_level, ctx.require_seed(), ctx.threads,
                      cfg.normalization};
  const EnvelopeResult env = k_time_envelope(p, t, opt);
  FunctionEstimate table = env.observed;
  table.envelope = env.rank_band;
  ctx.out.write(slice.name("k_time.csv"),
                capture([&](std::ostream& os) { write_function_table(os, table, "t"); }));
  const std::vector<double> tv(t.values().begin(), t.values().end());
  svg::LinePlot plot{fmt::format("K2(t) with {}% envelope under uniform times", format_number(100 * cfg.envelope_level)),
                     "time lag t", "K2(t)", {}};
  plot.series.push_back({"estimate", tv, env.observed.values, svg::Stroke::Solid, "#1f3b73"});
  plot.series.push_back({"2t", tv, *env.observed.theoretical, svg::Stroke::Dotted, "#000000"});
  plot.series.push_back({"envelope", tv, env.rank_band.upper, svg::Stroke::Dashed, "#c0392b"});
  plot.series.push_back({"", tv, env.rank_band.lower, svg::Stroke::Dashed, "#c0392b"});
  ctx.out.write(slice.name("k_time.svg"), svg::render(plot));
  std::size_t outside = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    outside += env.observed.values[i] > env.rank_band.upper[i] || env.observed.values[i] < env.rank_band.lower[i];
  }
  return {{"n", p.size()}, {"grid_points", t.size()}, {"outside_envelope", outside}};
}

struct StCore {
  DistanceGrid s;
  LagGrid t;
  STGrid k;
  FunctionEstimate k1;
  FunctionEstimate k2;
  SpaceTimeDifference diff;
};

StCore st_core(const Context& ctx, const Slice& slice, const STPattern& p) {
  const DistanceGrid s = s_grid(ctx.cfg, p.window());
  const LagGrid t = t_grid(ctx.cfg, p.time_window());
  STGrid k = k_hat_st(p, s, t);
  FunctionEstimate k1 = k_hat_space(p, s);
  FunctionEstimate k2 = k_hat_time(p, t);
  note_clamps(ctx, slice, k1);
  SpaceTimeDifference diff = d_hat_st(k, k1, k2);
  return {s, t, std::move(k), std::move(k1), std::move(k2), std::move(diff)};
}

void write_grid(const Context& ctx, const Slice& slice, const std::string& file, const STGrid& g) {
  ctx.out.write(slice.name(file), capture([&](std::ostream& os) { write_st_grid(os, g); }));
}

Json run_st_k(const Context& ctx, const Slice& slice) {
  const STPattern p = spatio_temporal(ctx, slice);
  const StCore c = st_core(ctx, slice, p);
  write_grid(ctx, slice, "k_st.csv", c.k);
  write_grid(ctx, slice, "d_st.csv", c.diff.d);
  write_grid(ctx, slice, "k0_st.csv", c.diff.k0);
  const STGrid d0 = d0_hat_st(c.diff.d, c.diff.k0);
  write_grid(ctx, slice, "d0_st.csv", d0);
  ctx.out.write(slice.name("k1.csv"), capture([&](std::ostream& os) { write_function_table(os, c.k1); }));
  ctx.out.write(slice.name("k2.csv"), capture([&](std::ostream& os) { write_function_table(os, c.k2, "t"); }));
  ctx.out.write(slice.name("d_st.svg"), svg::render(st_heat_map(c.diff.d, "D(s,t) = K(s,t) - K1(s) K2(t)", false)));
  ctx.out.write(slice.name("d0_st.svg"), svg::render(st_heat_map(d0, "D0(s,t) = D(s,t) / K1(s) K2(t)", false)));
  std::size_t no_data = 0;
  for (double v : d0.values()) no_data += std::isnan(v);
  if (no_data > 0) ctx.warn(slice, fmt::format("D0: {} cells with K1 K2 = 0 set to no-data", no_data));
  return {{"n", p.size()},
          {"cells", c.k.rows() * c.k.cols()},
          {"d_origin_cell", c.diff.d.at(0, 0)},
          {"d0_no_data_cells", no_data}};
}

Json run_st_diagnostics(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const STPattern p = spatio_temporal(ctx, slice);
  const StCore c = st_core(ctx, slice, p);
  const VarianceGrid v = variance_grid(p, c.s, c.t, cfg.variance_permutations, ctx.require_seed(), ctx.threads);
  const double floor = default_variance_floor(c.diff.k0);
  const ResidualGrid r = residual_grid(c.diff.d, v.variance, floor);
  if (r.excluded > 0) {
    ctx.warn(slice, fmt::format("residuals: {} cells with V below {} excluded", r.excluded, num(floor)));
  }
  write_grid(ctx, slice, "d_st.csv", c.diff.d);
  write_grid(ctx, slice, "k0_st.csv", c.diff.k0);
  write_grid(ctx, slice, "variance_st.csv", v.variance);
  write_grid(ctx, slice, "se_st.csv", v.se);
  write_grid(ctx, slice, "residual_st.csv", r.r);
  ctx.out.write(slice.name("se_st.svg"),
                svg::render(st_heat_map(v.se, fmt::format("standard error of D(s,t), {} time permutations",
                                                         cfg.variance_permutations),
                                        true)));
  ctx.out.write(slice.name("d_st.svg"), svg::render(st_heat_map(c.diff.d, "D(s,t)", false)));
  svg::Scatter scatter{"standardized residuals R(s,t) against K1(s) K2(t)", "K1(s) K2(t)", "R(s,t)", {}, {}, 0.0};
  for (std::size_t i = 0; i < r.r.values().size(); ++i) {
    scatter.x.push_back(c.diff.k0.values()[i]);
    scatter.y.push_back(r.r.values()[i]);
  }
  ctx.out.write(slice.name("residual_plot.svg"), svg::render(scatter));
  Json result = {{"n", p.size()}, {"variance_permutations", cfg.variance_permutations},
                 {"variance_floor", floor}, {"cells_excluded", r.excluded}};
  try {
    const UStatistic u = u_statistic(r.r);
    result["u"] = u.value;
    result["cells_used"] = u.cells_used;
  } catch (const DegenerateStatisticError& e) {
    ctx.warn(slice, fmt::format("U statistic undefined: {}", e.what()));
  }
  return result;
}

Json run_st_mc_test(const Context& ctx, const Slice& slice) {
  const AnalysisConfig& cfg = ctx.cfg;
  const STPattern p = spatio_temporal(ctx, slice);
  const DistanceGrid s = s_grid(cfg, p.window());
  const LagGrid t = t_grid(cfg, p.time_window());
  MCTestOptions opt;
  opt.replicates = cfg.mc_replicates;
  opt.variance_permutations = cfg.variance_permutations;
  opt.seed = ctx.require_seed();
  opt.tail = cfg.tail;
  opt.threads = ctx.threads;
  const MCTestResult r = mc_interaction_test(p, s, t, opt);
  if (r.cells_excluded > 0) {
    ctx.warn(slice, fmt::format("U statistic: {} cells with V below the floor excluded", r.cells_excluded));
  }
  std::optional<GaussianTestResult> g;
  try {
    g = gaussian_from_replicates(r.u_observed, r.u_replicates);
  } catch (const DegenerateStatisticError& e) {
    ctx.warn(slice, fmt::format("Gaussian approximation unavailable: {}", e.what()));
  }

  std::string report;
  report += fmt::format("U = {}\n", num(r.u_observed));
  report += fmt::format("m = {} (observed + {} time permutations), V from {} permutations\n", r.m,
                        r.u_replicates.size(), cfg.variance_permutations);
  report += fmt::format("rank = {} ({} tail)\n", r.rank, tail_name(r.direction));
  report += mc_report_line(r) + "\n";
  report += fmt::format("cells used = {}, excluded = {}\n", r.cells_used, r.cells_excluded);
  if (g) {
    report += fmt::format("gaussian approximation: z = {}, two-sided p = {} (approximate)\n", num(g->z),
                          num(g->p_two_sided));
  }
  ctx.out.write(slice.name("mc_report.txt"), report);

  std::string reps = "replicate,u\n0," + num(r.u_observed) + "\n";
  for (std::size_t i = 0; i < r.u_replicates.size(); ++i) reps += fmt::format("{},{}\n", i + 1, num(r.u_replicates[i]));
  ctx.out.write(slice.name("mc_replicates.csv"), reps);
  svg::Histogram hist{"U under time permutation; observed U marked", "U", r.u_replicates, r.u_observed, 30};
  ctx.out.write(slice.name("mc_histogram.svg"), svg::render(hist));

  Json result = {{"n", p.size()},         {"u", r.u_observed},   {"m", r.m},
                 {"rank", r.rank},        {"p", r.p_value},      {"direction", interaction_name(r.direction)},
                 {"cells_used", r.cells_used}, {"cells_excluded", r.cells_excluded}};
  if (g) {
    result["z"] = g->z;
    result["p_gaussian_two_sided"] = g->p_two_sided;
  }
  return result;
}

Json run_synth_validate(const Context& ctx, RunManifest& manifest) {
  const validation::Scale scale =
      ctx.cfg.validation_scale == "quick" ? validation::Scale::quick() : validation::Scale::full();
  validation::Options opt;
  if (ctx.seed) opt.seed = *ctx.seed;
  opt.threads = ctx.threads;
  const auto checks = validation::run_all(scale, opt, [&](const validation::Check& c) {
    manifest.timing.emplace_back("check " + c.id, c.seconds);
  });
  std::string csv = "check,result,observed,requirement,description\n";
  auto quote = [](const std::string& s) {
    std::string out = "\"";
    for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return out + "\"";
  };
  std::size_t width = 5;
  for (const auto& c : checks) width = std::max(width, c.id.size());
  std::string text = fmt::format("{:<{}}  {:<6}  {}\n", "check", width, "result", "observed (requirement)");
  std::size_t failed = 0;
  for (const auto& c : checks) {
    const char* verdict = c.passed ? "pass" : "FAIL";
    failed += !c.passed;
    csv += fmt::format("{},{},{},{},{}\n", c.id, verdict, quote(c.observed), quote(c.requirement), quote(c.description));
    text += fmt::format("{:<{}}  {:<6}  {} ({})\n", c.id, width, verdict, c.observed, c.requirement);
  }
  text += fmt::format("{} of {} checks passed\n", checks.size() - failed, checks.size());
  ctx.out.write("validation.csv", csv);
  ctx.out.write("validation.txt", text);
  if (failed > 0) manifest.warnings.push_back(fmt::format("synth-validate: {} checks failed", failed));
  return {{"checks", checks.size()}, {"failed", failed}, {"scale", ctx.cfg.validation_scale}};
}

// ---------------------------------------------------------------------------
// Data and strata

EventTable load_events(const AnalysisConfig& cfg) {
  if (!cfg.input) throw ConfigError(fmt::format("{}: input is required", cfg.source.origin()));
  if (!cfg.window) throw ConfigError(fmt::format("{}: window or window_file is required", cfg.source.origin()));
  std::ifstream in(*cfg.input);
  if (!in) throw IoError(fmt::format("cannot open input '{}'", cfg.input->string()));
  return ingest(in, cfg.schema, *cfg.window, cfg.time_window);
}

Json ingest_json(const IngestReport& r) {
  return {{"rows_read", r.rows_read},       {"rows_accepted", r.rows_accepted}, {"out_of_window", r.out_of_window},
          {"unparseable", r.unparseable},   {"missing_field", r.missing_field}, {"duplicates", r.duplicate_count}};
}

void ingest_warnings(const IngestReport& r, std::vector<std::string>& warnings) {
  if (r.rows_rejected() > 0) {
    warnings.push_back(fmt::format("ingest: {} of {} rows rejected ({} outside the window, {} unparseable, {} missing fields)",
                                   r.rows_rejected(), r.rows_read, r.out_of_window, r.unparseable, r.missing_field));
  }
  if (r.duplicate_count > 0) {
    warnings.push_back(fmt::format("ingest: {} duplicate coordinates retained", r.duplicate_count));
  }
}

struct Stratum {
  std::string label;
  double start_day = 0;  // calendar bounds, days since 1970-01-01
  double end_day = 0;
  std::vector<std::size_t> rows;
};

std::vector<Stratum> calendar_strata(const AnalysisConfig& cfg, const EventTable& table) {
  using namespace std::chrono;
  const double unit = days_per_unit(cfg.time_unit);
  auto day_of = [&](double t) { return sys_days{days{static_cast<long long>(std::floor(cfg.epoch_days + t * unit + 1e-9))}}; };
  const auto& times = *table.times;
  std::map<long long, Stratum> strata;  // keyed by stratum start day
  auto stratum_of = [&](sys_days d) {
    const year_month_day ymd{d};
    Stratum s;
    sys_days start, end;
    switch (cfg.stratify) {
      case Stratify::Year:
        start = sys_days{ymd.year() / January / 1};
        end = sys_days{(ymd.year() + years{1}) / January / 1};
        s.label = fmt::format("{:04}", static_cast<int>(ymd.year()));
        break;
      case Stratify::Month: {
        const year_month ym{ymd.year(), ymd.month()};
        start = sys_days{ym / 1};
        end = sys_days{(ym + months{1}) / 1};
        s.label = format_date(start).substr(0, 7);
        break;
      }
      case Stratify::Week: {
        const IsoWeek w = iso_week(d);
        start = iso_week_start(w);
        end = start + days{7};
        s.label = fmt::format("{:04}-W{:02}", w.year, w.week);
        break;
      }
      case Stratify::None: break;
    }
    s.start_day = static_cast<double>(start.time_since_epoch().count());
    s.end_day = static_cast<double>(end.time_since_epoch().count());
    return s;
  };
  for (std::size_t i = 0; i < times.size(); ++i) {
    Stratum s = stratum_of(day_of(times[i]));
    auto [it, inserted] = strata.try_emplace(static_cast<long long>(s.start_day), std::move(s));
    it->second.rows.push_back(i);
  }
  // Empty strata between the first and last event are reported too.
  std::vector<Stratum> out;
  if (strata.empty()) return out;
  const long long last = strata.rbegin()->first;
  for (long long key = strata.begin()->first; key <= last;) {
    const auto it = strata.find(key);
    Stratum s = it != strata.end() ? it->second : stratum_of(sys_days{days{key}});
    key = static_cast<long long>(s.end_day);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<Slice> make_slices(const AnalysisConfig& cfg, const EventTable& table, RunManifest& manifest,
                               Json& strata_json) {
  std::vector<Slice> slices;
  if (cfg.stratify == Stratify::None) {
    slices.push_back({"", "", table.pattern, table.marks, table.times, table.time_window});
    return slices;
  }
  if (!table.times) throw ConfigError("stratify needs event times");
  const double unit = days_per_unit(cfg.time_unit);
  for (const Stratum& s : calendar_strata(cfg, table)) {
    Json entry = {{"stratum", s.label}, {"events", s.rows.size()}};
    std::size_t cases = s.rows.size();
    if (table.marks) {
      cases = 0;
      for (std::size_t i : s.rows) cases += (*table.marks)[i] == Mark::Case;
      entry["cases"] = cases;
      entry["controls"] = s.rows.size() - cases;
    }
    const char* skip = nullptr;
    if (s.rows.empty()) {
      skip = "empty";
    } else if (cases < 2) {
      skip = table.marks ? "fewer than 2 cases" : "fewer than 2 events";
    }
    if (skip) {
      manifest.warnings.push_back(fmt::format("stratum {}: {}, skipped", s.label, skip));
      entry["status"] = "skipped";
      entry["reason"] = skip;
      strata_json.push_back(entry);
      continue;
    }
    std::vector<Point> pts;
    std::vector<double> times;
    std::optional<std::vector<Mark>> marks;
    if (table.marks) marks.emplace();
    for (std::size_t i : s.rows) {
      pts.push_back(table.pattern[i]);
      times.push_back((*table.times)[i]);
      if (marks) marks->push_back((*table.marks)[i]);
    }
    double lo = (s.start_day - cfg.epoch_days) / unit;
    double hi = (s.end_day - cfg.epoch_days) / unit;
    if (cfg.time_window) {
      lo = std::max(lo, cfg.time_window->start());
      hi = std::min(hi, cfg.time_window->end());
    }
    lo = std::min(lo, *std::min_element(times.begin(), times.end()));
    hi = std::max(hi, *std::max_element(times.begin(), times.end()));
    entry["status"] = "analysed";
    entry["time_window"] = {lo, hi};
    strata_json.push_back(entry);
    slices.push_back({s.label, s.label + "/", PointPattern(table.pattern.window(), std::move(pts)), std::move(marks),
                      std::move(times), TimeWindow(lo, hi, cfg.time_unit)});
  }
  return slices;
}

Json run_slice(const Context& ctx, const Slice& slice) {
  switch (ctx.pipeline) {
    case Pipeline::Intensity: return run_intensity(ctx, slice);
    case Pipeline::CsrL: return run_csr_l(ctx, slice);
    case Pipeline::DiggleD: return run_diggle_d(ctx, slice);
    case Pipeline::TemporalHist: return run_temporal_hist(ctx, slice);
    case Pipeline::TemporalK: return run_temporal_k(ctx, slice);
    case Pipeline::StK: return run_st_k(ctx, slice);
    case Pipeline::StDiagnostics: return run_st_diagnostics(ctx, slice);
    case Pipeline::StMcTest: return run_st_mc_test(ctx, slice);
    case Pipeline::SynthValidate: break;
  }
  throw ConfigError("pipeline has no per-slice form");
}

const std::vector<std::pair<Pipeline, const char*>> kPipelines = {
    {Pipeline::Intensity, "intensity"},       {Pipeline::CsrL, "csr-l"},
    {Pipeline::DiggleD, "diggle-d"},          {Pipeline::TemporalHist, "temporal-hist"},
    {Pipeline::TemporalK, "temporal-k"},      {Pipeline::StK, "st-k"},
    {Pipeline::StDiagnostics, "st-diagnostics"}, {Pipeline::StMcTest, "st-mc-test"},
    {Pipeline::SynthValidate, "synth-validate"},
};

}  // namespace

const char* pipeline_name(Pipeline pipeline) {
  for (const auto& [p, name] : kPipelines) {
    if (p == pipeline) return name;
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& text) {
  std::string known;
  for (const auto& [p, name] : kPipelines) {
    if (text == name) return p;
    known += known.empty() ? name : fmt::format(", {}", name);
  }
  throw ConfigError(fmt::format("unknown pipeline '{}' ({})", text, known));
}

nlohmann::ordered_json RunManifest::to_json() const {
  Json j;
  j["tool"] = "stpp";
  j["version"] = tool_version;
  j["pipeline"] = pipeline;
  j["config_hash"] = "fnv1a64:" + config_hash;
  j["seed"] = seed ? Json(*seed) : Json(nullptr);
  Json t = Json::object();
  for (const auto& [label, secs] : timing) t[label] = secs;
  j["timing_seconds"] = t;
  Json files = Json::array();
  for (const auto& f : outputs) files.push_back({{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.fnv1a}});
  j["outputs"] = files;
  j["warnings"] = warnings;
  j["results"] = results;
  return j;
}

RunManifest run_pipeline(const AnalysisConfig& config, Pipeline pipeline, const RunOverrides& overrides) {
  const auto start = Clock::now();
  RunManifest manifest;
  manifest.tool_version = kToolVersion;
  manifest.config_hash = config.hash();
  manifest.pipeline = pipeline_name(pipeline);
  manifest.seed = overrides.seed ? overrides.seed : config.seed;
  const fs::path root = overrides.out_dir.value_or(config.out_dir);
  const unsigned threads = overrides.threads.value_or(config.threads);
  if (threads < 1) throw ConfigError("threads must be at least 1");
  Outputs out(root, manifest);
  const Context ctx{config, pipeline, threads, manifest.seed, out, manifest};

  if (pipeline == Pipeline::SynthValidate) {
    const auto t0 = Clock::now();
    manifest.results["validation"] = run_synth_validate(ctx, manifest);
    manifest.timing.emplace_back(pipeline_name(pipeline), seconds_since(t0));
  } else {
    const auto t0 = Clock::now();
    const EventTable table = load_events(config);
    manifest.timing.emplace_back("ingest", seconds_since(t0));
    manifest.results["ingest"] = ingest_json(table.report);
    ingest_warnings(table.report, manifest.warnings);
    Json strata = Json::array();
    const std::vector<Slice> slices = make_slices(config, table, manifest, strata);
    Json per_slice = Json::array();
    for (const Slice& slice : slices) {
      const auto ts = Clock::now();
      Json r;
      try {
        r = run_slice(ctx, slice);
      } catch (const InsufficientDataError& e) {
        if (config.stratify == Stratify::None) throw;
        manifest.warnings.push_back(fmt::format("stratum {}: {}, skipped", slice.label, e.what()));
        for (auto& s : strata) {
          if (s["stratum"] == slice.label) {
            s["status"] = "skipped";
            s["reason"] = e.what();
          }
        }
        continue;
      }
      manifest.timing.emplace_back(slice.label.empty() ? pipeline_name(pipeline) : "stratum " + slice.label,
                                   seconds_since(ts));
      if (!slice.label.empty()) {
        Json tagged = {{"stratum", slice.label}};
        tagged.update(r);
        r = std::move(tagged);
      }
      per_slice.push_back(r);
    }
    if (config.stratify == Stratify::None) {
      manifest.results["analysis"] = per_slice.empty() ? Json::object() : per_slice[0];
    } else {
      manifest.results["stratify"] = stratify_name(config.stratify);
      manifest.results["strata"] = strata;
      manifest.results["analysis"] = per_slice;
    }
  }
  manifest.timing.emplace_back("total", seconds_since(start));
  const std::string text = manifest.to_json().dump(2) + "\n";
  std::error_code ec;
  fs::create_directories(root, ec);
  std::ofstream mf(root / "manifest.json", std::ios::binary);
  if (!mf) throw IoError(fmt::format("cannot write '{}'", (root / "manifest.json").string()));
  mf << text;
  return manifest;
}

nlohmann::ordered_json validate_config(const std::filesystem::path& path) {
  const AnalysisConfig cfg = load_config(path);
  Json j;
  j["config"] = path.string();
  j["config_hash"] = "fnv1a64:" + cfg.hash();
  j["valid"] = true;
  if (!cfg.input) {
    j["input"] = nullptr;
    return j;
  }
  const EventTable table = load_events(cfg);
  std::vector<std::string> warnings;
  ingest_warnings(table.report, warnings);
  j["input"] = cfg.input->string();
  j["ingest"] = ingest_json(table.report);
  Json pattern = {{"n", table.pattern.size()}, {"window_area", table.pattern.window().area()}};
  if (table.marks) {
    const MarkedPattern m = table.marked();
    pattern["cases"] = m.count(Mark::Case);
    pattern["controls"] = m.count(Mark::Control);
  }
  if (table.time_window) pattern["time_window"] = {table.time_window->start(), table.time_window->end()};
  j["pattern"] = pattern;
  j["warnings"] = warnings;
  return j;
}

}  // namespace stpp::app
