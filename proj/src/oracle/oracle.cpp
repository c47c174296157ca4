#include "stpp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace stpp::oracle {

double arc_sampling_proportion(Point center, double radius, const Window& window,
                               std::size_t samples) {
  const double step = 2.0 * std::numbers::pi / static_cast<double>(samples);
  auto inside = [&](double angle) {
    return window.contains({center.x + radius * std::cos(angle), center.y + radius * std::sin(angle)});
  };
  double covered = 0.0;
  bool prev = inside(0.0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double a0 = step * static_cast<double>(k);
    const double a1 = k + 1 == samples ? 2.0 * std::numbers::pi : a0 + step;
    const bool next = inside(a1);
    if (prev == next) {
      if (prev) covered += a1 - a0;
    } else {
      double lo = a0, hi = a1;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (inside(mid) == prev ? lo : hi) = mid;
      }
      covered += prev ? lo - a0 : a1 - lo;
    }
    prev = next;
  }
  return covered / (2.0 * std::numbers::pi);
}

std::vector<double> naive_k(std::span<const Point> points, const Window& window,
                            std::span<const double> s, bool point_count_scaling) {
  const auto n = static_cast<double>(points.size());
  const double scale = point_count_scaling ? window.area() / (n * n)
                                           : window.area() / (n * (n - 1.0));
  std::vector<double> out;
  for (double radius : s) {
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = 0; j < points.size(); ++j) {
        if (i == j) continue;
        const double d = distance(points[i], points[j]);
        if (d < radius) sum += spatial_edge_weight(points[i], d, window).weight;
      }
    }
    out.push_back(scale * sum);
  }
  return out;
}

int naive_temporal_factor(double t, double lag, double start, double end) {
  const double left = t - lag;
  const double right = t + lag;
  return (start < left && right < end) ? 1 : 2;
}

std::vector<double> naive_k_st(std::span<const Point> points, std::span<const double> times,
                               const Window& window, double t_start, double t_end,
                               std::span<const double> s, std::span<const double> t) {
  const auto n = static_cast<double>(points.size());
  const double scale = window.area() * (t_end - t_start) / (n * (n - 1.0));
  std::vector<double> out;
  for (double radius : s) {
    for (double lag_limit : t) {
      double sum = 0.0;
      for (std::size_t i = 0; i < points.size(); ++i) {
        for (std::size_t j = 0; j < points.size(); ++j) {
          if (i == j) continue;
          const double d = distance(points[i], points[j]);
          const double u = std::abs(times[i] - times[j]);
          if (d < radius && u < lag_limit) {
            sum += spatial_edge_weight(points[i], d, window).weight *
                   naive_temporal_factor(times[i], u, t_start, t_end);
          }
        }
      }
      out.push_back(scale * sum);
    }
  }
  return out;
}

std::vector<double> naive_k_time(std::span<const double> times, double t_start, double t_end,
                                 std::span<const double> t) {
  const auto n = static_cast<double>(times.size());
  const double scale = (t_end - t_start) / (n * (n - 1.0));
  std::vector<double> out;
  for (double lag_limit : t) {
    double sum = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      for (std::size_t j = 0; j < times.size(); ++j) {
        if (i == j) continue;
        const double u = std::abs(times[i] - times[j]);
        if (u < lag_limit) sum += naive_temporal_factor(times[i], u, t_start, t_end);
      }
    }
    out.push_back(scale * sum);
  }
  return out;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    const double fa = static_cast<double>(i) / static_cast<double>(a.size());
    const double fb = static_cast<double>(j) / static_cast<double>(b.size());
    best = std::max(best, std::abs(fa - fb));
  }
  return best;
}

double ks_critical_value(double alpha, std::size_t n1, std::size_t n2) {
  const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
  const auto a = static_cast<double>(n1), b = static_cast<double>(n2);
  return c * std::sqrt((a + b) / (a * b));
}

}  // namespace stpp::oracle
