#include "stpp/geometry.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>

#include <fmt/format.h>

#include "stpp/errors.hpp"

namespace stpp {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double cross(Point o, Point a, Point b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double signed_area(const std::vector<Point>& ring) {
  double twice = 0.0;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const Point& a = ring[k];
    const Point& b = ring[(k + 1) % ring.size()];
    twice += a.x * b.y - b.x * a.y;
  }
  return 0.5 * twice;
}

bool on_segment(Point a, Point b, Point p, double tol) {
  const double len = distance(a, b);
  if (std::abs(cross(a, b, p)) > tol * std::max(len, 1.0)) return false;
  return p.x >= std::min(a.x, b.x) - tol && p.x <= std::max(a.x, b.x) + tol &&
         p.y >= std::min(a.y, b.y) - tol && p.y <= std::max(a.y, b.y) + tol;
}

int orientation(Point a, Point b, Point c) {
  const double v = cross(a, b, c);
  return (v > 0) - (v < 0);
}

bool segments_touch(Point p1, Point p2, Point q1, Point q2) {
  const int o1 = orientation(p1, p2, q1);
  const int o2 = orientation(p1, p2, q2);
  const int o3 = orientation(q1, q2, p1);
  const int o4 = orientation(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  return (o1 == 0 && on_segment(p1, p2, q1, 0.0)) || (o2 == 0 && on_segment(p1, p2, q2, 0.0)) ||
         (o3 == 0 && on_segment(q1, q2, p1, 0.0)) || (o4 == 0 && on_segment(q1, q2, p2, 0.0));
}

// Measure of the union of closed arcs given as (start, end) with
// -pi <= start < end <= 3 pi, after folding onto [0, 2 pi).
double arc_union_length(std::vector<std::pair<double, double>> arcs) {
  std::vector<std::pair<double, double>> folded;
  for (auto [lo, hi] : arcs) {
    if (lo < 0.0) {
      folded.emplace_back(lo + kTwoPi, kTwoPi);
      folded.emplace_back(0.0, hi);
    } else if (hi > kTwoPi) {
      folded.emplace_back(lo, kTwoPi);
      folded.emplace_back(0.0, hi - kTwoPi);
    } else {
      folded.emplace_back(lo, hi);
    }
  }
  std::sort(folded.begin(), folded.end());
  double total = 0.0;
  double cur_lo = 0.0, cur_hi = -1.0;
  for (auto [lo, hi] : folded) {
    if (lo > cur_hi) {
      if (cur_hi > cur_lo) total += cur_hi - cur_lo;
      cur_lo = lo;
      cur_hi = hi;
    } else {
      cur_hi = std::max(cur_hi, hi);
    }
  }
  if (cur_hi > cur_lo) total += cur_hi - cur_lo;
  return std::min(total, kTwoPi);
}

double rectangle_proportion(Point c, double r, const BoundingBox& box) {
  // Each side the circle crosses hides an arc centred on the outward normal.
  const std::array<std::pair<double, double>, 4> sides{{
      {box.x_max - c.x, 0.0},
      {box.y_max - c.y, 0.5 * std::numbers::pi},
      {c.x - box.x_min, std::numbers::pi},
      {c.y - box.y_min, 1.5 * std::numbers::pi},
  }};
  std::vector<std::pair<double, double>> outside;
  for (auto [gap, normal] : sides) {
    if (gap >= r) continue;
    const double half = std::acos(gap / r);
    outside.emplace_back(normal - half, normal + half);
  }
  if (outside.empty()) return 1.0;
  return 1.0 - arc_union_length(std::move(outside)) / kTwoPi;
}

double polygon_proportion(Point c, double r, const Window& window) {
  const auto ring = window.vertices();
  std::vector<double> angles;
  for (std::size_t k = 0; k < ring.size(); ++k) {
    const Point a = ring[k];
    const Point b = ring[(k + 1) % ring.size()];
    const double dx = b.x - a.x, dy = b.y - a.y;
    const double fx = a.x - c.x, fy = a.y - c.y;
    const double qa = dx * dx + dy * dy;
    const double qb = 2.0 * (fx * dx + fy * dy);
    const double qc = fx * fx + fy * fy - r * r;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) continue;
    const double root = std::sqrt(disc);
    for (double s : {(-qb - root) / (2.0 * qa), (-qb + root) / (2.0 * qa)}) {
      if (s < 0.0 || s > 1.0) continue;
      double angle = std::atan2(fy + s * dy, fx + s * dx);
      if (angle < 0.0) angle += kTwoPi;
      angles.push_back(angle);
    }
  }
  if (angles.empty()) return window.contains({c.x + r, c.y}) ? 1.0 : 0.0;
  std::sort(angles.begin(), angles.end());
  double inside = 0.0;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const double lo = angles[k];
    const double hi = k + 1 < angles.size() ? angles[k + 1] : angles.front() + kTwoPi;
    if (hi <= lo) continue;
    const double mid = 0.5 * (lo + hi);
    if (window.contains({c.x + r * std::cos(mid), c.y + r * std::sin(mid)})) inside += hi - lo;
  }
  return std::clamp(inside / kTwoPi, 0.0, 1.0);
}

}  // namespace

Window Window::rectangle(double x_min, double y_min, double x_max, double y_max) {
  if (!(std::isfinite(x_min) && std::isfinite(y_min) && std::isfinite(x_max) &&
        std::isfinite(y_max))) {
    throw ConfigError("rectangle window bounds must be finite");
  }
  if (!(x_min < x_max) || !(y_min < y_max)) {
    throw ConfigError(fmt::format("degenerate rectangle window [{}, {}] x [{}, {}]", x_min, x_max,
                                  y_min, y_max));
  }
  Window w;
  w.rectangle_ = true;
  w.vertices_ = {{x_min, y_min}, {x_max, y_min}, {x_max, y_max}, {x_min, y_max}};
  w.bounds_ = {x_min, y_min, x_max, y_max};
  w.area_ = (x_max - x_min) * (y_max - y_min);
  return w;
}

Window Window::polygon(std::vector<Point> vertices) {
  if (vertices.size() >= 2 && vertices.front() == vertices.back()) vertices.pop_back();
  if (vertices.size() < 3) throw ConfigError("polygon window needs at least 3 vertices");
  for (const Point& p : vertices) {
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
      throw ConfigError("polygon window vertices must be finite");
    }
  }
  double area = signed_area(vertices);
  if (area < 0.0) {
    std::reverse(vertices.begin(), vertices.end());
    area = -area;
  }
  if (!(area > 0.0)) throw ConfigError("polygon window has zero area");

  const std::size_t n = vertices.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point a = vertices[k], b = vertices[(k + 1) % n];
    if (a == b) throw ConfigError("polygon window has repeated consecutive vertices");
    for (std::size_t l = k + 1; l < n; ++l) {
      const Point c = vertices[l], d = vertices[(l + 1) % n];
      const bool adjacent = l == k + 1 || (k == 0 && l == n - 1);
      if (adjacent) {
        // Shared vertex only; a fold back along the same line is degenerate.
        const Point shared = l == k + 1 ? b : a;
        const Point other_ab = l == k + 1 ? a : b;
        const Point other_cd = l == k + 1 ? d : c;
        if (orientation(other_ab, shared, other_cd) == 0 &&
            ((other_ab.x - shared.x) * (other_cd.x - shared.x) +
             (other_ab.y - shared.y) * (other_cd.y - shared.y)) > 0.0) {
          throw ConfigError("polygon window folds back on itself");
        }
        continue;
      }
      if (segments_touch(a, b, c, d)) {
        throw ConfigError(fmt::format("polygon window is not simple: edges {} and {} intersect", k, l));
      }
    }
  }

  Window w;
  w.rectangle_ = false;
  w.area_ = area;
  BoundingBox box{vertices[0].x, vertices[0].y, vertices[0].x, vertices[0].y};
  for (const Point& p : vertices) {
    box.x_min = std::min(box.x_min, p.x);
    box.y_min = std::min(box.y_min, p.y);
    box.x_max = std::max(box.x_max, p.x);
    box.y_max = std::max(box.y_max, p.y);
  }
  w.bounds_ = box;
  w.vertices_ = std::move(vertices);
  return w;
}

double Window::diameter() const {
  double best = 0.0;
  for (std::size_t a = 0; a < vertices_.size(); ++a) {
    for (std::size_t b = a + 1; b < vertices_.size(); ++b) {
      best = std::max(best, distance(vertices_[a], vertices_[b]));
    }
  }
  return best;
}

bool Window::contains(Point p) const {
  if (rectangle_) {
    return p.x >= bounds_.x_min && p.x <= bounds_.x_max && p.y >= bounds_.y_min &&
           p.y <= bounds_.y_max;
  }
  if (p.x < bounds_.x_min || p.x > bounds_.x_max || p.y < bounds_.y_min || p.y > bounds_.y_max) {
    return false;
  }
  const double tol = 1e-12 * std::max({bounds_.width(), bounds_.height(), 1.0});
  bool inside = false;
  const std::size_t n = vertices_.size();
  for (std::size_t k = 0, prev = n - 1; k < n; prev = k++) {
    const Point a = vertices_[prev], b = vertices_[k];
    if (on_segment(a, b, p, tol)) return true;
    if ((b.y > p.y) != (a.y > p.y)) {
      const double x_cross = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < x_cross) inside = !inside;
    }
  }
  return inside;
}

Window Window::moved(double angle, double dx, double dy) const {
  if (angle == 0.0 && rectangle_) {
    return rectangle(bounds_.x_min + dx, bounds_.y_min + dy, bounds_.x_max + dx,
                     bounds_.y_max + dy);
  }
  const double c = std::cos(angle), s = std::sin(angle);
  std::vector<Point> ring;
  ring.reserve(vertices_.size());
  for (const Point& p : vertices_) ring.push_back({c * p.x - s * p.y + dx, s * p.x + c * p.y + dy});
  return polygon(std::move(ring));
}

std::string Window::describe() const {
  if (rectangle_) {
    return fmt::format("rect {} {} {} {}", bounds_.x_min, bounds_.y_min, bounds_.x_max,
                       bounds_.y_max);
  }
  std::string out = "polygon";
  for (const Point& p : vertices_) out += fmt::format(" {} {}", p.x, p.y);
  return out;
}

double arc_proportion_inside(Point center, double radius, const Window& window) {
  if (!(radius >= 0.0)) throw DomainError("circle radius must be non-negative");
  if (radius == 0.0) return 1.0;
  if (window.is_rectangle() && window.contains(center)) {
    return rectangle_proportion(center, radius, window.bounds());
  }
  return polygon_proportion(center, radius, window);
}

EdgeWeight spatial_edge_weight(Point center, double radius, const Window& window) {
  if (!window.contains(center)) {
    throw DomainError(fmt::format("edge weight center ({}, {}) lies outside the window", center.x,
                                  center.y));
  }
  const double p = arc_proportion_inside(center, radius, window);
  if (p < kMinArcProportion) return {1.0 / kMinArcProportion, true};
  return {1.0 / p, false};
}

const char* time_resolution_name(TimeResolution resolution) {
  switch (resolution) {
    case TimeResolution::Year: return "year";
    case TimeResolution::Month: return "month";
    case TimeResolution::Week: return "week";
    case TimeResolution::Day: return "day";
    case TimeResolution::Abstract: return "abstract";
  }
  return "abstract";
}

TimeResolution parse_time_resolution(const std::string& text) {
  if (text == "year") return TimeResolution::Year;
  if (text == "month") return TimeResolution::Month;
  if (text == "week") return TimeResolution::Week;
  if (text == "day") return TimeResolution::Day;
  if (text == "abstract") return TimeResolution::Abstract;
  throw ConfigError(fmt::format("unknown time resolution '{}'", text));
}

TimeWindow::TimeWindow(double start, double end, TimeResolution resolution)
    : start_(start), end_(end), resolution_(resolution) {
  if (!std::isfinite(start) || !std::isfinite(end) || !(end > start)) {
    throw ConfigError(fmt::format("time window ({}, {}) must have positive length", start, end));
  }
}

int temporal_edge_factor(double t, double lag, const TimeWindow& window) {
  if (!window.contains(t)) {
    throw DomainError(fmt::format("event time {} lies outside [{}, {}]", t, window.start(),
                                  window.end()));
  }
  if (!(lag >= 0.0)) throw DomainError("time lag must be non-negative");
  return (t - lag > window.start() && t + lag < window.end()) ? 1 : 2;
}

std::vector<PairSeparation> pairwise_separations(std::span<const Point> points,
                                                 std::span<const double> times) {
  const std::size_t n = points.size();
  if (n < 2) throw InsufficientDataError("pairwise separations need at least 2 points");
  if (!times.empty() && times.size() != n) {
    throw DomainError("times must be empty or have one entry per point");
  }
  std::vector<PairSeparation> out;
  out.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double lag = times.empty() ? 0.0 : std::abs(times[i] - times[j]);
      out.push_back({i, j, distance(points[i], points[j]), lag});
    }
  }
  return out;
}

}  // namespace stpp
