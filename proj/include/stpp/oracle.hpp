#pragma once

// Reference implementations used to check the production estimators. They
// share nothing with the estimator code paths beyond the point, window and
// edge-weight primitives, and favour obviousness over speed.

#include <cstddef>
#include <span>
#include <vector>

#include "stpp/geometry.hpp"

namespace stpp::oracle {

// Fraction of the circle inside the window from `samples` equally spaced
// angles; arcs whose end samples disagree are refined by bisection so the
// result is accurate far beyond 1 / samples.
double arc_sampling_proportion(Point center, double radius, const Window& window,
                               std::size_t samples = 1'000'000);

// Ripley K by a plain double loop per grid value, |A| / (n (n - 1)) scaling
// (or |A| / n^2 when point_count_scaling is set).
std::vector<double> naive_k(std::span<const Point> points, const Window& window,
                            std::span<const double> s, bool point_count_scaling = false);

// Temporal edge factor written out independently of the geometry module.
int naive_temporal_factor(double t, double lag, double start, double end);

// Space-time K by a triple loop (cell, i, j); result is row-major [s][t].
std::vector<double> naive_k_st(std::span<const Point> points, std::span<const double> times,
                               const Window& window, double t_start, double t_end,
                               std::span<const double> s, std::span<const double> t);

std::vector<double> naive_k_time(std::span<const double> times, double t_start, double t_end,
                                 std::span<const double> t);

// Two-sample Kolmogorov-Smirnov statistic sup |F1 - F2|.
double ks_statistic(std::vector<double> a, std::vector<double> b);
// Asymptotic critical value at level alpha for sample sizes n1, n2.
double ks_critical_value(double alpha, std::size_t n1, std::size_t n2);

}  // namespace stpp::oracle
