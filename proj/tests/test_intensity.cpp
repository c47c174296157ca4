#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/intensity.hpp"
#include "stpp/random.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);

PointPattern random_pattern(const Window& w, std::size_t n, std::uint64_t seed, double margin) {
  RandomStream rng(seed);
  const BoundingBox b = w.bounds();
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i)
    pts.push_back({rng.uniform(b.x_min + margin, b.x_max - margin),
                   rng.uniform(b.y_min + margin, b.y_max - margin)});
  return PointPattern(w, pts);
}

}  // namespace

TEST_CASE("quadratic kernel values and shape") {
  CHECK(quadratic_kernel(0) == 1.0);
  CHECK(quadratic_kernel(std::numbers::sqrt2) == 0.0);
  CHECK(quadratic_kernel(1) == 0.25);
  CHECK(quadratic_kernel(2) == 0.0);
  double previous = 1.0;
  for (double u = 0; u <= 1.5; u += 0.01) {
    CHECK(quadratic_kernel(u) == quadratic_kernel(-u));
    CHECK(quadratic_kernel(u) <= previous);
    CHECK(quadratic_kernel(u) >= 0.0);
    previous = quadratic_kernel(u);
  }
}

TEST_CASE("point evaluations") {
  const PointPattern one(kUnit, {{0.5, 0.5}});
  CHECK(intensity_at(one, {0.5, 0.5}, 0.2, KernelVariant::Literal) == doctest::Approx(5.0));
  CHECK(intensity_at(one, {0.5, 0.5 + 0.2 * std::numbers::sqrt2 + 1e-9}, 0.2,
                     KernelVariant::Literal) == 0.0);
  CHECK(intensity_at(one, {0.9, 0.9}, 0.1, KernelVariant::AreaNormalized) == 0.0);
}

TEST_CASE("surface errors and warnings") {
  const PointPattern one(kUnit, {{0.5, 0.5}});
  CHECK_THROWS_AS(intensity_estimate(one, 0.0), ConfigError);
  CHECK_THROWS_AS(intensity_estimate(one, -1.0), ConfigError);
  const IntensitySurface empty = intensity_estimate(PointPattern(kUnit, {}), 0.1, {32, 32});
  CHECK(!empty.warnings.empty());
  for (double v : empty.raster.values()) CHECK(v == 0.0);
}

TEST_CASE("area-normalized surface integrates to n") {
  const Window w = Window::rectangle(0, 0, 2, 1);
  const double h = 0.1;
  const PointPattern p = random_pattern(w, 60, 17, std::numbers::sqrt2 * h);
  const IntensitySurface s = intensity_estimate(p, h, {400, 200}, KernelVariant::AreaNormalized);
  CHECK(std::abs(integrate(s.raster) - 60.0) / 60.0 < 1e-3);
}

TEST_CASE("literal surface is additive and matches pointwise evaluation") {
  const PointPattern p = random_pattern(kUnit, 20, 1, 0);
  const PointPattern q = random_pattern(kUnit, 15, 2, 0);
  std::vector<Point> both(p.points().begin(), p.points().end());
  both.insert(both.end(), q.points().begin(), q.points().end());
  const GridSpec g{48, 48};
  const auto sp = intensity_estimate(p, 0.15, g, KernelVariant::Literal);
  const auto sq = intensity_estimate(q, 0.15, g, KernelVariant::Literal);
  const auto sb = intensity_estimate(PointPattern(kUnit, both), 0.15, g, KernelVariant::Literal);
  for (std::size_t iy = 0; iy < g.ny; ++iy)
    for (std::size_t ix = 0; ix < g.nx; ++ix) {
      CHECK(sb.raster.at(ix, iy) ==
            doctest::Approx(sp.raster.at(ix, iy) + sq.raster.at(ix, iy)).epsilon(1e-12));
      CHECK(sb.raster.at(ix, iy) >= sp.raster.at(ix, iy));
    }
  const Point c = sp.raster.cell_center(7, 30);
  CHECK(sp.raster.at(7, 30) ==
        doctest::Approx(intensity_at(p, c, 0.15, KernelVariant::Literal)).epsilon(1e-12));
}

TEST_CASE("surface is translation-equivariant") {
  const PointPattern p = random_pattern(kUnit, 25, 9, 0);
  const Window shifted_w = Window::rectangle(10, -3, 11, -2);
  std::vector<Point> shifted;
  for (const Point& pt : p.points()) shifted.push_back({pt.x + 10, pt.y - 3});
  const auto a = intensity_estimate(p, 0.2, {32, 32});
  const auto b = intensity_estimate(PointPattern(shifted_w, shifted), 0.2, {32, 32});
  for (std::size_t i = 0; i < a.raster.values().size(); ++i)
    CHECK(b.raster.values()[i] == doctest::Approx(a.raster.values()[i]).epsilon(1e-9));
}

TEST_CASE("polygon windows mark exterior cells as no-data") {
  const Window tri = Window::polygon({{0, 0}, {1, 0}, {0, 1}});
  const PointPattern p(tri, {{0.2, 0.2}});
  const auto s = intensity_estimate(p, 0.2, {10, 10});
  CHECK(s.raster.defined(0, 0));
  CHECK_FALSE(s.raster.defined(9, 9));
}

TEST_CASE("intensity ratios") {
  const PointPattern p = random_pattern(kUnit, 30, 4, 0);
  std::vector<Point> doubled(p.points().begin(), p.points().end());
  doubled.insert(doubled.end(), p.points().begin(), p.points().end());
  const GridSpec g{40, 40};
  const auto controls = intensity_estimate(p, 0.1, g);
  const auto same = intensity_ratio(controls, controls, 1e-12);
  const auto cases = intensity_estimate(PointPattern(kUnit, doubled), 0.1, g);
  const auto twice = intensity_ratio(cases, controls, 1e-12);
  std::size_t defined = 0;
  for (std::size_t i = 0; i < same.values().size(); ++i) {
    if (std::isnan(same.values()[i])) {
      CHECK(controls.raster.values()[i] < 1e-12);
      continue;
    }
    ++defined;
    CHECK(same.values()[i] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(twice.values()[i] == doctest::Approx(2.0).epsilon(1e-12));
  }
  CHECK(defined > 0);

  const PointPattern lone(kUnit, {{0.05, 0.05}});
  const auto sparse = intensity_estimate(lone, 0.1, g);
  const auto r = intensity_ratio(controls, sparse, 1e-12);
  CHECK(std::isnan(r.at(39, 39)));

  CHECK_THROWS_AS(intensity_ratio(controls, intensity_estimate(p, 0.1, {20, 20}), 0.0), ConfigError);
  CHECK_THROWS_AS(intensity_ratio(controls, intensity_estimate(p, 0.2, g), 0.0), ConfigError);
}

TEST_CASE("raster export") {
  const Window tri = Window::polygon({{0, 0}, {1, 0}, {0, 1}});
  const auto s = intensity_estimate(PointPattern(tri, {{0.2, 0.2}}), 0.2, {4, 4});
  std::ostringstream out;
  write_raster(out, s.raster, s.bandwidth, kernel_variant_name(s.variant));
  const std::string text = out.str();
  CHECK(text.rfind("#", 0) == 0);
  CHECK(text.find("NA") != std::string::npos);
}
