#include "stpp/intensity.hpp"

#include <algorithm>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "stpp/errors.hpp"

namespace stpp {

namespace {

const double kSupport = std::numbers::sqrt2;

double variant_scale(double h, KernelVariant variant) {
  return variant == KernelVariant::Literal ? 1.0 / h : 1.0 / (h * h * kQuadraticKernelMass);
}

}  // namespace

double quadratic_kernel(double u) {
  if (!(std::abs(u) < kSupport)) return 0.0;
  const double a = 1.0 - 0.5 * u * u;
  return a <= 0.0 ? 0.0 : a * a;
}

const char* kernel_variant_name(KernelVariant variant) {
  return variant == KernelVariant::Literal ? "literal" : "area-normalized";
}

KernelVariant parse_kernel_variant(const std::string& text) {
  if (text == "literal") return KernelVariant::Literal;
  if (text == "area-normalized") return KernelVariant::AreaNormalized;
  throw ConfigError(fmt::format("unknown kernel variant '{}'", text));
}

Raster::Raster(BoundingBox extent, std::size_t nx, std::size_t ny, double fill)
    : extent_(extent), nx_(nx), ny_(ny), values_(nx * ny, fill) {
  if (nx == 0 || ny == 0) throw ConfigError("raster needs at least one cell in each direction");
}

Point Raster::cell_center(std::size_t ix, std::size_t iy) const {
  return {extent_.x_min + (static_cast<double>(ix) + 0.5) * cell_width(),
          extent_.y_min + (static_cast<double>(iy) + 0.5) * cell_height()};
}

bool Raster::same_geometry(const Raster& other) const {
  return extent_ == other.extent_ && nx_ == other.nx_ && ny_ == other.ny_;
}

double intensity_at(const PointPattern& pattern, Point location, double bandwidth,
                    KernelVariant variant) {
  if (!(bandwidth > 0.0)) throw ConfigError("bandwidth must be positive");
  double sum = 0.0;
  for (const Point& p : pattern.points()) sum += quadratic_kernel(distance(p, location) / bandwidth);
  return variant_scale(bandwidth, variant) * sum;
}

IntensitySurface intensity_estimate(const PointPattern& pattern, double bandwidth, GridSpec grid,
                                    KernelVariant variant) {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("bandwidth must be positive");
  }
  const Window& window = pattern.window();
  IntensitySurface surface{Raster(window.bounds(), grid.nx, grid.ny), bandwidth, variant, {}};
  Raster& r = surface.raster;
  if (pattern.empty()) surface.warnings.push_back("empty pattern: intensity surface is zero");

  // Scatter each point into the cells within its kernel support. Points are
  // visited in order, so every cell accumulates its terms in index order.
  const double reach = kSupport * bandwidth;
  const double scale = variant_scale(bandwidth, variant);
  const auto& box = r.extent();
  auto clamp_index = [](double v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp(v, 0.0, static_cast<double>(n - 1)));
  };
  for (const Point& p : pattern.points()) {
    const std::size_t x0 = clamp_index(std::floor((p.x - reach - box.x_min) / r.cell_width()), r.nx());
    const std::size_t x1 = clamp_index(std::floor((p.x + reach - box.x_min) / r.cell_width()), r.nx());
    const std::size_t y0 = clamp_index(std::floor((p.y - reach - box.y_min) / r.cell_height()), r.ny());
    const std::size_t y1 = clamp_index(std::floor((p.y + reach - box.y_min) / r.cell_height()), r.ny());
    for (std::size_t iy = y0; iy <= y1; ++iy) {
      for (std::size_t ix = x0; ix <= x1; ++ix) {
        r.at(ix, iy) += quadratic_kernel(distance(p, r.cell_center(ix, iy)) / bandwidth);
      }
    }
  }
  for (std::size_t iy = 0; iy < r.ny(); ++iy) {
    for (std::size_t ix = 0; ix < r.nx(); ++ix) {
      if (!window.is_rectangle() && !window.contains(r.cell_center(ix, iy))) {
        r.at(ix, iy) = Raster::kNoData;
      } else {
        r.at(ix, iy) *= scale;
      }
    }
  }
  return surface;
}

Raster intensity_ratio(const IntensitySurface& cases, const IntensitySurface& controls,
                       double floor) {
  if (!cases.raster.same_geometry(controls.raster)) {
    throw ConfigError("intensity ratio needs surfaces on the same grid");
  }
  if (cases.bandwidth != controls.bandwidth || cases.variant != controls.variant) {
    throw ConfigError("intensity ratio needs surfaces with the same bandwidth and kernel");
  }
  Raster out(cases.raster.extent(), cases.raster.nx(), cases.raster.ny(), Raster::kNoData);
  for (std::size_t iy = 0; iy < out.ny(); ++iy) {
    for (std::size_t ix = 0; ix < out.nx(); ++ix) {
      const double num = cases.raster.at(ix, iy);
      const double den = controls.raster.at(ix, iy);
      if (std::isnan(num) || std::isnan(den) || !(den >= floor) || den == 0.0) continue;
      out.at(ix, iy) = num / den;
    }
  }
  return out;
}

double integrate(const Raster& raster) {
  double sum = 0.0;
  for (double v : raster.values()) {
    if (!std::isnan(v)) sum += v;
  }
  return sum * raster.cell_area();
}

void write_raster(std::ostream& out, const Raster& raster, double bandwidth,
                  const std::string& variant_name) {
  out << "# origin_x=" << format_number(raster.extent().x_min)
      << " origin_y=" << format_number(raster.extent().y_min)
      << " cell_width=" << format_number(raster.cell_width())
      << " cell_height=" << format_number(raster.cell_height()) << " nx=" << raster.nx()
      << " ny=" << raster.ny() << " bandwidth=" << format_number(bandwidth)
      << " kernel=" << variant_name << '\n';
  for (std::size_t iy = 0; iy < raster.ny(); ++iy) {
    for (std::size_t ix = 0; ix < raster.nx(); ++ix) {
      if (ix > 0) out << ',';
      const double v = raster.at(ix, iy);
      out << (std::isnan(v) ? std::string("NA") : format_number(v));
    }
    out << '\n';
  }
}

}  // namespace stpp
