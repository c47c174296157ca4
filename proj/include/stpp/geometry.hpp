#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stpp {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

struct BoundingBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Planar observation region A. Either an axis-aligned rectangle or a simple
// polygon; polygons are stored counter-clockwise without a closing vertex.
// Membership is closed: boundary points are inside.
class Window {
 public:
  static Window rectangle(double x_min, double y_min, double x_max, double y_max);
  // Accepts either orientation; rejects self-intersecting or degenerate rings.
  static Window polygon(std::vector<Point> vertices);

  bool is_rectangle() const { return rectangle_; }
  double area() const { return area_; }
  const BoundingBox& bounds() const { return bounds_; }
  // Largest distance between two points of the window.
  double diameter() const;
  std::span<const Point> vertices() const { return vertices_; }

  bool contains(Point p) const;

  // Rotation by `angle` radians about the origin followed by translation.
  // The result is a polygon unless the motion is a pure translation of a
  // rectangle.
  Window moved(double angle, double dx, double dy) const;

  std::string describe() const;

  friend bool operator==(const Window&, const Window&) = default;

 private:
  Window() = default;

  bool rectangle_ = false;
  std::vector<Point> vertices_;
  BoundingBox bounds_;
  double area_ = 0.0;
};

// Inside-arc proportions below this floor are clamped; the weight is then
// 1 / kMinArcProportion and the clamp is reported to the caller.
inline constexpr double kMinArcProportion = 1e-3;

// Fraction of the circle (center, radius) lying inside the window, in [0, 1].
// Rectangles use the closed-form arc union; polygons intersect the circle with
// every edge and classify the resulting arcs. radius == 0 gives 1.
double arc_proportion_inside(Point center, double radius, const Window& window);

struct EdgeWeight {
  double weight = 1.0;
  bool clamped = false;
};

// Ripley's isotropic correction: reciprocal of the inside-arc proportion.
// Throws DomainError when the center lies outside the window.
EdgeWeight spatial_edge_weight(Point center, double radius, const Window& window);

enum class TimeResolution { Year, Month, Week, Day, Abstract };

const char* time_resolution_name(TimeResolution resolution);
TimeResolution parse_time_resolution(const std::string& text);

// Observation period (start, end); estimators only use end - start and the
// offsets of event times from start.
class TimeWindow {
 public:
  TimeWindow(double start, double end, TimeResolution resolution = TimeResolution::Abstract);

  double start() const { return start_; }
  double end() const { return end_; }
  double length() const { return end_ - start_; }
  TimeResolution resolution() const { return resolution_; }
  bool contains(double t) const { return t >= start_ && t <= end_; }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;

 private:
  double start_;
  double end_;
  TimeResolution resolution_;
};

// v_ij: 1 when the interval of length 2 * lag centred at t lies strictly
// inside the open period, 2 otherwise. Throws DomainError for t outside the
// closed period or a negative lag.
int temporal_edge_factor(double t, double lag, const TimeWindow& window);

struct PairSeparation {
  std::size_t i = 0;
  std::size_t j = 0;
  double distance = 0.0;
  double lag = 0.0;
};

// All ordered pairs i != j. `times` may be empty for purely spatial input,
// in which case every lag is 0. Throws InsufficientDataError for n < 2.
std::vector<PairSeparation> pairwise_separations(std::span<const Point> points,
                                                 std::span<const double> times);

}  // namespace stpp
