#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/geometry.hpp"
#include "stpp/oracle.hpp"
#include "stpp/random.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);

double relative(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST_CASE("rectangle windows validate their bounds") {
  CHECK(kUnit.area() == 1.0);
  CHECK(kUnit.diameter() == doctest::Approx(std::numbers::sqrt2));
  CHECK_THROWS_AS(Window::rectangle(1, 0, 0, 1), ConfigError);
  CHECK_THROWS_AS(Window::rectangle(0, 0, 1, 0), ConfigError);
  CHECK(kUnit.contains({0, 0}));
  CHECK(kUnit.contains({1, 0.5}));
  CHECK_FALSE(kUnit.contains({1.0000001, 0.5}));
}

TEST_CASE("polygon windows: orientation, simplicity, membership") {
  // Clockwise input is accepted and stored counter-clockwise.
  const Window l_shape = Window::polygon({{0, 0}, {0, 2}, {1, 2}, {1, 1}, {2, 1}, {2, 0}});
  CHECK(l_shape.area() == doctest::Approx(3.0));
  CHECK(l_shape.contains({0.5, 1.5}));
  CHECK(l_shape.contains({1, 1.5}));  // on an edge
  CHECK_FALSE(l_shape.contains({1.5, 1.5}));

  CHECK_THROWS_AS(Window::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}), ConfigError);  // bow tie
  CHECK_THROWS_AS(Window::polygon({{0, 0}, {1, 0}, {2, 0}}), ConfigError);          // zero area
  CHECK_THROWS_AS(Window::polygon({{0, 0}, {1, 0}}), ConfigError);
  // A closing vertex equal to the first is dropped.
  CHECK(Window::polygon({{0, 0}, {1, 0}, {1, 1}, {0, 1}, {0, 0}}).vertices().size() == 4);
}

TEST_CASE("spatial edge weight: interior, mid-edge and corner circles") {
  CHECK(spatial_edge_weight({0.5, 0.5}, 0.1, kUnit).weight == 1.0);
  CHECK(spatial_edge_weight({0.5, 0.0}, 0.1, kUnit).weight == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(spatial_edge_weight({0.0, 0.0}, 0.1, kUnit).weight == doctest::Approx(4.0).epsilon(1e-12));

  // Arc-sampling oracle at 10^6 samples.
  CHECK(1.0 / oracle::arc_sampling_proportion({0.5, 0.5}, 0.1, kUnit) ==
        doctest::Approx(1.0).epsilon(1e-6));
  CHECK(1.0 / oracle::arc_sampling_proportion({0.5, 0.0}, 0.1, kUnit) ==
        doctest::Approx(2.0).epsilon(1e-6));
  CHECK(1.0 / oracle::arc_sampling_proportion({0.0, 0.0}, 0.1, kUnit) ==
        doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("spatial edge weight errors and clamping") {
  CHECK_THROWS_AS(spatial_edge_weight({1.5, 0.5}, 0.1, kUnit), DomainError);
  CHECK(spatial_edge_weight({0.5, 0.5}, 0.0, kUnit).weight == 1.0);
  // A corner circle in a long thin sliver keeps well under 0.1% of its arc.
  const Window sliver = Window::rectangle(0, 0, 1, 1e-6);
  const EdgeWeight w = spatial_edge_weight({0, 0}, 0.5, sliver);
  CHECK(w.clamped);
  CHECK(w.weight == 1.0 / kMinArcProportion);
}

TEST_CASE("rectangle closed form matches the polygon route and the sampling oracle") {
  const Window rect = Window::rectangle(-1, 2, 3, 4.5);
  const Window as_polygon = Window::polygon({{-1, 2}, {3, 2}, {3, 4.5}, {-1, 4.5}});
  RandomStream rng(2024);
  for (int trial = 0; trial < 40; ++trial) {
    const Point c{rng.uniform(-1, 3), rng.uniform(2, 4.5)};
    const double r = rng.uniform(0.01, 3.0);
    const double closed = arc_proportion_inside(c, r, rect);
    CHECK(arc_proportion_inside(c, r, as_polygon) == doctest::Approx(closed).epsilon(1e-12));
    if (closed >= kMinArcProportion) {
      const double sampled = oracle::arc_sampling_proportion(c, r, rect, 200'000);
      CHECK(relative(1.0 / closed, 1.0 / sampled) < 1e-6);
    }
  }
}

TEST_CASE("polygon edge weights agree with the sampling oracle") {
  const Window l_shape = Window::polygon({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}});
  RandomStream rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    Point c{rng.uniform(0, 2), rng.uniform(0, 2)};
    if (!l_shape.contains(c)) continue;
    const double r = rng.uniform(0.05, 1.5);
    const double exact = arc_proportion_inside(c, r, l_shape);
    const double sampled = oracle::arc_sampling_proportion(c, r, l_shape, 200'000);
    CHECK(exact == doctest::Approx(sampled).epsilon(1e-8));
  }
}

TEST_CASE("edge weight is exactly 1 below the boundary distance and >= 1 always") {
  RandomStream rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const Point c{rng.uniform(), rng.uniform()};
    const double gap = std::min({c.x, c.y, 1 - c.x, 1 - c.y});
    CHECK(spatial_edge_weight(c, gap * rng.uniform(), kUnit).weight == 1.0);
    CHECK(spatial_edge_weight(c, rng.uniform(0, 1.5), kUnit).weight >= 1.0);
  }
}

TEST_CASE("temporal edge factor follows the open-interval rule") {
  const TimeWindow tw(0, 10);
  CHECK(temporal_edge_factor(5, 2, tw) == 1);
  CHECK(temporal_edge_factor(1, 2, tw) == 2);
  CHECK(temporal_edge_factor(5, 5, tw) == 2);
  CHECK(temporal_edge_factor(0, 0, tw) == 2);
  CHECK_THROWS_AS(temporal_edge_factor(11, 1, tw), DomainError);
  CHECK_THROWS_AS(temporal_edge_factor(-0.5, 1, tw), DomainError);
  CHECK_THROWS_AS(TimeWindow(3, 3), ConfigError);
}

TEST_CASE("temporal edge factor is invariant under time reflection") {
  const TimeWindow tw(0, 7.5);
  RandomStream rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    const double t = rng.uniform(0, 7.5);
    const double u = rng.uniform(0, 5);
    CHECK(temporal_edge_factor(t, u, tw) == temporal_edge_factor(7.5 - t, u, tw));
  }
}

TEST_CASE("pairwise separations") {
  const std::vector<Point> two{{0, 0}, {3, 4}};
  const std::vector<double> times{1, 5};
  const auto pairs = pairwise_separations(two, times);
  REQUIRE(pairs.size() == 2);
  for (const auto& p : pairs) {
    CHECK(p.distance == 5.0);
    CHECK(p.lag == 4.0);
  }
  CHECK_THROWS_AS(pairwise_separations(std::vector<Point>{{0, 0}}, std::vector<double>{1}),
                  InsufficientDataError);

  const std::vector<Point> same{{1, 1}, {1, 1}};
  const auto dup = pairwise_separations(same, std::vector<double>{2, 2});
  CHECK(dup.size() == 2);
  CHECK(dup[0].distance == 0.0);
  CHECK(dup[0].lag == 0.0);
}

TEST_CASE("pairwise separations are a permutation-invariant multiset") {
  RandomStream rng(12);
  std::vector<Point> pts;
  std::vector<double> times;
  for (int i = 0; i < 12; ++i) {
    pts.push_back({rng.uniform(), rng.uniform()});
    times.push_back(rng.uniform(0, 5));
  }
  auto key = [](const std::vector<PairSeparation>& v) {
    std::vector<std::pair<double, double>> out;
    for (const auto& p : v) out.emplace_back(p.distance, p.lag);
    std::sort(out.begin(), out.end());
    return out;
  };
  const auto before = key(pairwise_separations(pts, times));
  std::vector<std::size_t> order(pts.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<Point> p2;
  std::vector<double> t2;
  for (auto k : order) {
    p2.push_back(pts[k]);
    t2.push_back(times[k]);
  }
  CHECK(key(pairwise_separations(p2, t2)) == before);
  // Symmetry of the ordered table.
  const auto table = pairwise_separations(pts, times);
  for (const auto& p : table) {
    const auto mirror = std::find_if(table.begin(), table.end(), [&](const PairSeparation& q) {
      return q.i == p.j && q.j == p.i;
    });
    REQUIRE(mirror != table.end());
    CHECK(mirror->distance == p.distance);
    CHECK(mirror->lag == p.lag);
  }
}
