#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stpp/geometry.hpp"

// Deterministic SVG chart emitters. Identical inputs give identical bytes.
namespace stpp::svg {

enum class Stroke { Solid, Dotted, Dashed };

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  Stroke stroke = Stroke::Solid;
  std::string color = "#1f3b73";
};

struct LinePlot {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
};

// Values are row-major with rows along y: values[iy * x.size() + ix].
// NaN cells are drawn grey. Low values are red, high values white.
struct HeatMap {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> values;
  bool annotate = false;
  std::optional<double> color_max;  // values above are drawn at the top colour
};

struct Scatter {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<double> reference_y;
};

struct Histogram {
  std::string title;
  std::string x_label;
  std::vector<double> samples;
  std::optional<double> observed;
  std::size_t bins = 30;
};

struct BarChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<std::string> labels;
  std::vector<double> heights;
};

struct PointGroup {
  std::string label;
  std::vector<Point> points;
  std::string color;
};

struct PointMap {
  std::string title;
  Window window;
  std::vector<PointGroup> groups;
};

std::string render(const LinePlot& plot);
std::string render(const HeatMap& map);
std::string render(const Scatter& plot);
std::string render(const Histogram& plot);
std::string render(const BarChart& chart);
std::string render(const PointMap& map);

// Red (0) to white (1) colour ramp as "#rrggbb".
std::string ramp_color(double fraction);

// Roughly `target` round tick values covering [lo, hi].
std::vector<double> nice_ticks(double lo, double hi, int target = 5);

}  // namespace stpp::svg
