#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>

namespace stpp::svg {
namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 440;
constexpr double kLeft = 72;
constexpr double kTop = 40;
constexpr double kBottom = 56;

std::string num(double v) {
  std::string s = fmt::format("{:.2f}", v);
  if (s == "-0.00") s = "0.00";
  return s;
}

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double value, double step) {
  const int decimals = std::max(0, static_cast<int>(-std::floor(std::log10(step) + 1e-9)));
  std::string s = fmt::format("{:.{}f}", value, decimals);
  if (s.find_first_not_of("-0.") == std::string::npos) s = "0";
  return s;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void add(double v) {
    if (!std::isfinite(v)) return;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  template <typename C>
  void add_all(const C& values) {
    for (double v : values) add(v);
  }
  Range padded() const {
    Range r = *this;
    if (!std::isfinite(r.lo)) return {0.0, 1.0};
    if (r.hi == r.lo) {
      const double pad = r.lo == 0.0 ? 1.0 : 0.5 * std::abs(r.lo);
      r.lo -= pad;
      r.hi += pad;
    }
    return r;
  }
};

struct Frame {
  Range x, y;
  double left = kLeft, top = kTop, width = kWidth - kLeft - 24, height = kHeight - kTop - kBottom;

  double px(double v) const { return left + (v - x.lo) / (x.hi - x.lo) * width; }
  double py(double v) const { return top + height - (v - y.lo) / (y.hi - y.lo) * height; }
};

void open(std::string& out, double width = kWidth, double height = kHeight) {
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\" font-family=\"sans-serif\" font-size=\"12\">\n",
      num(width), num(height));
  out += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"#ffffff\"/>\n", num(width), num(height));
}

void close(std::string& out) { out += "</svg>\n"; }

void title(std::string& out, const std::string& text, double width = kWidth) {
  if (text.empty()) return;
  out += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     num(width / 2), escape(text));
}

// Draws the axes. With `snap`, the frame ranges first grow to the outer ticks.
void axes(std::string& out, Frame& f, const std::string& x_label, const std::string& y_label,
          bool x_ticks = true, bool snap = true) {
  const auto xt = nice_ticks(f.x.lo, f.x.hi);
  const auto yt = nice_ticks(f.y.lo, f.y.hi);
  if (snap && x_ticks && xt.size() >= 2) {
    f.x.lo = std::min(f.x.lo, xt.front());
    f.x.hi = std::max(f.x.hi, xt.back());
  }
  if (snap && yt.size() >= 2) {
    f.y.lo = std::min(f.y.lo, yt.front());
    f.y.hi = std::max(f.y.hi, yt.back());
  }
  out += fmt::format(
      "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n",
      num(f.left), num(f.top), num(f.width), num(f.height));
  const double bottom = f.top + f.height;
  if (x_ticks) {
    const double step = xt.size() >= 2 ? xt[1] - xt[0] : 1.0;
    for (double t : xt) {
      if (t < f.x.lo || t > f.x.hi) continue;
      out += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#000000\"/>\n",
                         num(f.px(t)), num(bottom), num(bottom + 5));
      out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", num(f.px(t)),
                         num(bottom + 18), tick_label(t, step));
    }
  }
  const double ystep = yt.size() >= 2 ? yt[1] - yt[0] : 1.0;
  for (double t : yt) {
    if (t < f.y.lo || t > f.y.hi) continue;
    out += fmt::format("<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#000000\"/>\n",
                       num(f.left - 5), num(f.left), num(f.py(t)));
    out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", num(f.left - 8),
                       num(f.py(t) + 4), tick_label(t, ystep));
  }
  out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
                     num(f.left + f.width / 2), num(bottom + 40), escape(x_label));
  out += fmt::format(
      "<text x=\"16\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0})\">{1}</text>\n",
      num(f.top + f.height / 2), escape(y_label));
}

const char* dash(Stroke stroke) {
  switch (stroke) {
    case Stroke::Solid: return "";
    case Stroke::Dotted: return " stroke-dasharray=\"2,3\"";
    case Stroke::Dashed: return " stroke-dasharray=\"7,4\"";
  }
  return "";
}

void legend(std::string& out, const Frame& f,
            const std::vector<std::pair<std::string, std::string>>& entries,  // label, swatch svg
            double row = 16) {
  double y = f.top + 14;
  for (const auto& [label, swatch] : entries) {
    if (label.empty()) continue;
    const double x = f.left + f.width - 150;
    out += fmt::format(fmt::runtime(swatch), num(x), num(y - 4), num(x + 24));
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(x + 30), num(y), escape(label));
    y += row;
  }
}

std::vector<double> cell_edges(const std::vector<double>& centers) {
  std::vector<double> edges(centers.size() + 1);
  if (centers.size() == 1) {
    const double half = centers[0] == 0.0 ? 0.5 : 0.5 * std::abs(centers[0]);
    return {centers[0] - half, centers[0] + half};
  }
  for (std::size_t i = 1; i < centers.size(); ++i) edges[i] = 0.5 * (centers[i - 1] + centers[i]);
  edges.front() = centers.front() - (edges[1] - centers.front());
  edges.back() = centers.back() + (centers.back() - edges[centers.size() - 1]);
  return edges;
}

}  // namespace

std::vector<double> nice_ticks(double lo, double hi, int target) {
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) return {};
  const double raw = (hi - lo) / std::max(1, target);
  const double magnitude = std::pow(10.0, std::floor(std::log10(raw)));
  double step = magnitude;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * magnitude;
    if (step >= raw) break;
  }
  const auto first = static_cast<long long>(std::floor(lo / step + 1e-9));
  const auto last = static_cast<long long>(std::ceil(hi / step - 1e-9));
  std::vector<double> ticks;
  for (long long k = first; k <= last; ++k) ticks.push_back(static_cast<double>(k) * step);
  return ticks;
}

std::string ramp_color(double fraction) {
  const double f = std::clamp(std::isfinite(fraction) ? fraction : 0.0, 0.0, 1.0);
  const auto channel = [](double v) { return static_cast<int>(std::lround(v)); };
  return fmt::format("#{:02x}{:02x}{:02x}", channel(200 + 55 * f), channel(255 * f), channel(255 * f));
}

std::string render(const LinePlot& plot) {
  Frame f;
  for (const auto& s : plot.series) {
    f.x.add_all(s.x);
    f.y.add_all(s.y);
  }
  f.x = f.x.padded();
  f.y = f.y.padded();
  std::string out;
  open(out);
  title(out, plot.title);
  axes(out, f, plot.x_label, plot.y_label);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& s : plot.series) {
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{} points=\"{}\"/>\n",
                           s.color, dash(s.stroke), points);
      }
      points.clear();
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += num(f.px(s.x[i])) + "," + num(f.py(s.y[i]));
    }
    flush();
    entries.emplace_back(
        s.label, fmt::format("<line x1=\"{{0}}\" y1=\"{{1}}\" x2=\"{{2}}\" y2=\"{{1}}\" stroke=\"{}\" "
                             "stroke-width=\"1.6\"{}/>\n",
                             s.color, dash(s.stroke)));
  }
  legend(out, f, entries);
  close(out);
  return out;
}

std::string render(const HeatMap& map) {
  Frame f;
  f.width -= 90;
  const auto xe = cell_edges(map.x);
  const auto ye = cell_edges(map.y);
  f.x.add_all(xe);
  f.y.add_all(ye);
  f.x = f.x.padded();
  f.y = f.y.padded();
  Range v;
  v.add_all(map.values);
  const bool capped = map.color_max && *map.color_max < v.hi && *map.color_max > v.lo;
  if (capped) v.hi = *map.color_max;
  std::string out;
  open(out);
  title(out, map.title);
  const Frame& cells = f;
  for (std::size_t iy = 0; iy < map.y.size(); ++iy) {
    for (std::size_t ix = 0; ix < map.x.size(); ++ix) {
      const double value = map.values[iy * map.x.size() + ix];
      const double x0 = cells.px(xe[ix]);
      const double x1 = cells.px(xe[ix + 1]);
      const double y0 = cells.py(ye[iy + 1]);
      const double y1 = cells.py(ye[iy]);
      std::string fill = "#bdbdbd";
      if (std::isfinite(value)) {
        fill = v.hi > v.lo ? ramp_color(std::min(1.0, (value - v.lo) / (v.hi - v.lo))) : ramp_color(0.5);
      }
      out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\"/>\n", num(x0),
                         num(y0), num(x1 - x0), num(y1 - y0), fill);
      if (map.annotate && std::isfinite(value)) {
        out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"9\">{}</text>\n",
                           num(0.5 * (x0 + x1)), num(0.5 * (y0 + y1) + 3), fmt::format("{:.3g}", value));
      }
    }
  }
  axes(out, f, map.x_label, map.y_label, true, false);
  // Colour bar.
  const double bar_x = f.left + f.width + 20;
  const int steps = 50;
  for (int k = 0; k < steps; ++k) {
    const double y = f.top + f.height * (1.0 - static_cast<double>(k + 1) / steps);
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"16\" height=\"{}\" fill=\"{}\"/>\n", num(bar_x),
                       num(y), num(f.height / steps + 0.5), ramp_color((k + 0.5) / steps));
  }
  if (std::isfinite(v.lo)) {
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(bar_x + 20), num(f.top + f.height),
                       fmt::format("{:.3g}", v.lo));
    out += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", num(bar_x + 20), num(f.top + 10),
                       fmt::format("{}{:.3g}", capped ? ">= " : "", v.hi));
  }
  close(out);
  return out;
}

std::string render(const Scatter& plot) {
  Frame f;
  f.x.add_all(plot.x);
  f.y.add_all(plot.y);
  if (plot.reference_y) f.y.add(*plot.reference_y);
  f.x = f.x.padded();
  f.y = f.y.padded();
  std::string out;
  open(out);
  title(out, plot.title);
  axes(out, f, plot.x_label, plot.y_label);
  if (plot.reference_y) {
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{2}\" x2=\"{1}\" y2=\"{2}\" stroke=\"#888888\" stroke-dasharray=\"7,4\"/>\n",
        num(f.left), num(f.left + f.width), num(f.py(*plot.reference_y)));
  }
  for (std::size_t i = 0; i < std::min(plot.x.size(), plot.y.size()); ++i) {
    if (!std::isfinite(plot.x[i]) || !std::isfinite(plot.y[i])) continue;
    out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#1f3b73\"/>\n", num(f.px(plot.x[i])),
                       num(f.py(plot.y[i])));
  }
  close(out);
  return out;
}

std::string render(const Histogram& plot) {
  Range r;
  r.add_all(plot.samples);
  if (plot.observed) r.add(*plot.observed);
  r = r.padded();
  const std::size_t bins = std::max<std::size_t>(1, plot.bins);
  const double width = (r.hi - r.lo) / static_cast<double>(bins);
  std::vector<double> counts(bins, 0.0);
  for (double s : plot.samples) {
    if (!std::isfinite(s)) continue;
    auto k = static_cast<std::size_t>((s - r.lo) / width);
    counts[std::min(k, bins - 1)] += 1.0;
  }
  Frame f;
  f.x = r;
  f.y.add(0.0);
  f.y.add_all(counts);
  f.y = f.y.padded();
  std::string out;
  open(out);
  title(out, plot.title);
  axes(out, f, plot.x_label, "count");
  for (std::size_t k = 0; k < bins; ++k) {
    if (counts[k] == 0.0) continue;
    const double x0 = f.px(r.lo + width * static_cast<double>(k));
    const double x1 = f.px(r.lo + width * static_cast<double>(k + 1));
    out += fmt::format(
        "<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n",
        num(x0), num(f.py(counts[k])), num(x1 - x0), num(f.py(0.0) - f.py(counts[k])));
  }
  if (plot.observed) {
    const double x = f.px(*plot.observed);
    out += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"#c00000\" stroke-width=\"2\"/>\n",
        num(x), num(f.top), num(f.top + f.height));
  }
  close(out);
  return out;
}

std::string render(const BarChart& chart) {
  Frame f;
  f.x = {0.0, static_cast<double>(std::max<std::size_t>(1, chart.heights.size()))};
  f.y.add(0.0);
  f.y.add_all(chart.heights);
  f.y = f.y.padded();
  std::string out;
  open(out);
  title(out, chart.title);
  axes(out, f, chart.x_label, chart.y_label, false);
  const std::size_t n = chart.heights.size();
  const std::size_t label_every = std::max<std::size_t>(1, (n + 11) / 12);
  for (std::size_t k = 0; k < n; ++k) {
    const double x0 = f.px(static_cast<double>(k) + 0.1);
    const double x1 = f.px(static_cast<double>(k) + 0.9);
    const double h = chart.heights[k];
    out += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"#c0392b\"/>\n", num(x0),
                       num(f.py(h)), num(x1 - x0), num(f.py(0.0) - f.py(h)));
    if (k % label_every == 0 && k < chart.labels.size()) {
      out += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\">{}</text>\n",
                         num(0.5 * (x0 + x1)), num(f.top + f.height + 16), escape(chart.labels[k]));
    }
  }
  close(out);
  return out;
}

std::string render(const PointMap& map) {
  const BoundingBox b = map.window.bounds();
  const double avail_w = kWidth - kLeft - 24;
  const double avail_h = kHeight - kTop - kBottom;
  const double scale = std::min(avail_w / b.width(), avail_h / b.height());
  Frame f;
  f.x = {b.x_min, b.x_max};
  f.y = {b.y_min, b.y_max};
  f.width = b.width() * scale;
  f.height = b.height() * scale;
  f.left = kLeft + 0.5 * (avail_w - f.width);
  f.top = kTop + 0.5 * (avail_h - f.height);
  std::string out;
  open(out);
  title(out, map.title);
  std::string outline;
  for (const Point& v : map.window.vertices()) {
    if (!outline.empty()) outline += ' ';
    outline += num(f.px(v.x)) + "," + num(f.py(v.y));
  }
  out += fmt::format("<polygon points=\"{}\" fill=\"none\" stroke=\"#000000\"/>\n", outline);
  std::vector<std::pair<std::string, std::string>> entries;
  for (const auto& g : map.groups) {
    for (const Point& p : g.points) {
      out += fmt::format("<circle cx=\"{}\" cy=\"{}\" r=\"2\" fill=\"{}\"/>\n", num(f.px(p.x)),
                         num(f.py(p.y)), g.color);
    }
    entries.emplace_back(g.label, fmt::format("<circle cx=\"{{0}}\" cy=\"{{1}}\" r=\"3\" fill=\"{}\"/>"
                                              "\n",
                                              g.color));
  }
  Frame legend_frame;
  legend_frame.top = 40;
  legend(out, legend_frame, entries);
  close(out);
  return out;
}

}  // namespace stpp::svg
