#pragma once

#include <cmath>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "stpp/geometry.hpp"
#include "stpp/patterns.hpp"

namespace stpp {

// Quadratic (biweight-type) kernel: (1 - u^2/2)^2 on |u| <= sqrt(2), else 0.
double quadratic_kernel(double u);

// Integral of quadratic_kernel(|x|) over the plane: 2 pi / 3.
inline constexpr double kQuadraticKernelMass = 2.0943951023931954923;

enum class KernelVariant {
  // h^-1 * sum f(d_i / h), exactly as the estimator is usually written.
  Literal,
  // h^-2 * sum f(d_i / h) / kQuadraticKernelMass; integrates to n over the
  // plane, so it is a proper events-per-area intensity.
  AreaNormalized,
};

const char* kernel_variant_name(KernelVariant variant);
KernelVariant parse_kernel_variant(const std::string& text);

struct GridSpec {
  std::size_t nx = 256;
  std::size_t ny = 256;
};

// Cell-centred raster over a bounding box, row-major with row 0 at y_min.
// Undefined cells hold NaN.
class Raster {
 public:
  Raster() = default;
  Raster(BoundingBox extent, std::size_t nx, std::size_t ny, double fill = 0.0);

  const BoundingBox& extent() const { return extent_; }
  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  double cell_width() const { return extent_.width() / static_cast<double>(nx_); }
  double cell_height() const { return extent_.height() / static_cast<double>(ny_); }
  double cell_area() const { return cell_width() * cell_height(); }
  Point cell_center(std::size_t ix, std::size_t iy) const;

  double& at(std::size_t ix, std::size_t iy) { return values_[iy * nx_ + ix]; }
  double at(std::size_t ix, std::size_t iy) const { return values_[iy * nx_ + ix]; }
  bool defined(std::size_t ix, std::size_t iy) const { return !std::isnan(at(ix, iy)); }
  const std::vector<double>& values() const { return values_; }

  bool same_geometry(const Raster& other) const;

  static constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();

 private:
  BoundingBox extent_;
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<double> values_;
};

struct IntensitySurface {
  Raster raster;
  double bandwidth = 0.0;
  KernelVariant variant = KernelVariant::AreaNormalized;
  std::vector<std::string> warnings;
};

// Kernel intensity at a single location.
double intensity_at(const PointPattern& pattern, Point location, double bandwidth,
                    KernelVariant variant);

// Evaluates the intensity at every cell centre of a grid over the window's
// bounding box. Cells whose centre lies outside a polygon window are NaN.
// No edge correction is applied. Throws ConfigError for bandwidth <= 0.
IntensitySurface intensity_estimate(const PointPattern& pattern, double bandwidth,
                                    GridSpec grid = {},
                                    KernelVariant variant = KernelVariant::AreaNormalized);

// Cellwise cases / controls; NaN where the control value is below `floor` or
// either input is undefined.
Raster intensity_ratio(const IntensitySurface& cases, const IntensitySurface& controls,
                       double floor);

// Midpoint-rule integral over the defined cells.
double integrate(const Raster& raster);

// Delimited raster: '#' header lines with origin, cell size and bandwidth,
// then one comma-separated row per grid row (y ascending), NaN as "NA".
void write_raster(std::ostream& out, const Raster& raster, double bandwidth,
                  const std::string& variant_name);

}  // namespace stpp
