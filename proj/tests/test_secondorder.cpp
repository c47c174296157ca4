#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/oracle.hpp"
#include "stpp/secondorder.hpp"
#include "stpp/synth.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);

FunctionEstimate fake_k(std::vector<double> s, std::vector<double> values) {
  FunctionEstimate k;
  k.abscissa = std::move(s);
  k.values = std::move(values);
  return k;
}

double max_relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max(std::abs(a[i]), std::abs(b[i]));
    if (scale > 0) worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace

TEST_CASE("distance grids validate") {
  CHECK_THROWS_AS(DistanceGrid({0.1, 0.1}), ConfigError);
  CHECK_THROWS_AS(DistanceGrid({0.0, 0.1}), ConfigError);
  CHECK_THROWS_AS(DistanceGrid(std::vector<double>{}), ConfigError);
  const DistanceGrid g = default_distance_grid(kUnit);
  CHECK(g.size() == 10);
  CHECK(g.max() == doctest::Approx(0.25 * std::numbers::sqrt2));
  CHECK_THROWS_AS(check_distance_grid(DistanceGrid({0.1, 0.5}), kUnit), ConfigError);
}

TEST_CASE("k_hat two-point example") {
  const PointPattern two(kUnit, {{0.35, 0.5}, {0.65, 0.5}});
  const auto k = k_hat(two, DistanceGrid({0.2, 0.5}));
  CHECK(k.values[0] == 0.0);
  CHECK(k.values[1] == doctest::Approx(1.0).epsilon(1e-15));
  REQUIRE(k.theoretical.has_value());
  CHECK((*k.theoretical)[1] == doctest::Approx(std::numbers::pi * 0.25));
  CHECK_THROWS_AS(k_hat(PointPattern(kUnit, {{0.5, 0.5}}), DistanceGrid({0.1})),
                  InsufficientDataError);
  // Point-count scaling: |A|/N^2 = 1/4 per unit weight.
  CHECK(k_hat(two, DistanceGrid({0.5}), KNormalization::PointCount).values[0] == 0.5);
}

TEST_CASE("k_hat strict inequality at the pair distance") {
  const PointPattern two(kUnit, {{0.25, 0.5}, {0.75, 0.5}});
  CHECK(k_hat(two, DistanceGrid({0.5})).values[0] == 0.0);
  CHECK(k_hat(two, DistanceGrid({std::nextafter(0.5, 1.0)})).values[0] > 0.0);
}

TEST_CASE("k_hat matches the naive oracle") {
  RandomStream rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + rng.below(150);
    const PointPattern p = generate_points(CsrBinomial{n}, kUnit, rng);
    const DistanceGrid g = DistanceGrid::uniform(0.35, 12);
    const std::vector<double> s(g.values().begin(), g.values().end());
    CHECK(max_relative_difference(k_hat(p, g).values, oracle::naive_k(p.points(), kUnit, s)) <
          1e-12);
    CHECK(max_relative_difference(k_hat(p, g, KNormalization::PointCount).values,
                                  oracle::naive_k(p.points(), kUnit, s, true)) < 1e-12);
  }
  // Polygon window.
  const Window hex = Window::polygon({{1, 0}, {2, 0}, {3, 1}, {2, 2}, {1, 2}, {0, 1}});
  const PointPattern ph = generate_points(CsrBinomial{80}, hex, rng);
  const DistanceGrid g = DistanceGrid::uniform(0.8, 8);
  const std::vector<double> s(g.values().begin(), g.values().end());
  CHECK(max_relative_difference(k_hat(ph, g).values, oracle::naive_k(ph.points(), hex, s)) < 1e-12);
}

TEST_CASE("k_hat is monotone and invariant under reordering and rigid motion") {
  RandomStream rng(4);
  const PointPattern p = generate_points(CsrBinomial{120}, kUnit, rng);
  const DistanceGrid g = DistanceGrid::uniform(0.3, 30);
  const auto k = k_hat(p, g);
  for (std::size_t i = 1; i < k.values.size(); ++i) CHECK(k.values[i] >= k.values[i - 1]);

  std::vector<Point> reversed(p.points().rbegin(), p.points().rend());
  CHECK(k_hat(PointPattern(kUnit, reversed), g).values == k.values);

  const double angle = 0.7;
  const Window moved = kUnit.moved(angle, 3.0, -2.0);
  std::vector<Point> moved_pts;
  for (const Point& q : p.points())
    moved_pts.push_back({std::cos(angle) * q.x - std::sin(angle) * q.y + 3.0,
                         std::sin(angle) * q.x + std::cos(angle) * q.y - 2.0});
  CHECK(max_relative_difference(k_hat(PointPattern(moved, moved_pts), g).values, k.values) < 1e-9);
}

TEST_CASE("k_hat without edge effects equals the unweighted pair count") {
  const Window big = Window::rectangle(0, 0, 10, 10);
  RandomStream rng(6);
  std::vector<Point> pts;
  for (int i = 0; i < 40; ++i) pts.push_back({rng.uniform(4, 6), rng.uniform(4, 6)});
  const DistanceGrid g({0.5, 1.0, 2.0});
  const auto k = k_hat(PointPattern(big, pts), g);
  for (std::size_t a = 0; a < g.size(); ++a) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < pts.size(); ++i)
      for (std::size_t j = 0; j < pts.size(); ++j)
        if (i != j && distance(pts[i], pts[j]) < g[a]) ++count;
    CHECK(k.values[a] == doctest::Approx(100.0 * count / (40.0 * 39.0)).epsilon(1e-14));
  }
}

TEST_CASE("l_hat algebra") {
  const std::vector<double> s{0.1, 0.2, 0.3};
  std::vector<double> csr, four, zero(3, 0.0);
  for (double v : s) {
    csr.push_back(std::numbers::pi * v * v);
    four.push_back(4 * std::numbers::pi * v * v);
  }
  const auto l0 = l_hat(fake_k(s, csr));
  const auto l1 = l_hat(fake_k(s, four));
  const auto l2 = l_hat(fake_k(s, zero));
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(l0.values[i] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(l1.values[i] == doctest::Approx(s[i]).epsilon(1e-14));
    CHECK(l2.values[i] == -s[i]);
  }
  CHECK_THROWS_AS(l_hat(fake_k(s, {0.1, -0.1, 0.2})), DomainError);
}

TEST_CASE("d_hat: identical multisets, anti-symmetry, insufficient data") {
  RandomStream rng(15);
  const PointPattern base = generate_points(CsrBinomial{50}, kUnit, rng);
  std::vector<Point> pts(base.points().begin(), base.points().end());
  pts.insert(pts.end(), base.points().rbegin(), base.points().rend());
  std::vector<Mark> marks(100, Mark::Control);
  std::fill(marks.begin(), marks.begin() + 50, Mark::Case);
  const DistanceGrid g = DistanceGrid::uniform(0.25, 10);
  const auto d = d_hat(MarkedPattern(PointPattern(kUnit, pts), marks), g);
  for (double v : d.values) CHECK(v == 0.0);

  const MarkedPattern mixed = generate_marked({CsrBinomial{40}, CsrBinomial{60}}, kUnit, rng);
  std::vector<Mark> swapped(mixed.marks().begin(), mixed.marks().end());
  for (Mark& m : swapped) m = m == Mark::Case ? Mark::Control : Mark::Case;
  const auto d1 = d_hat(mixed, g);
  const auto d2 = d_hat(MarkedPattern(mixed.base(), swapped), g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(d1.values[i] == -d2.values[i]);

  std::vector<Mark> lonely(mixed.size(), Mark::Control);
  lonely[0] = Mark::Case;
  CHECK_THROWS_AS(d_hat(MarkedPattern(mixed.base(), lonely), g), InsufficientDataError);
}

TEST_CASE("d_hat agrees with per-class k_hat") {
  RandomStream rng(21);
  const MarkedPattern mixed = generate_marked({CsrBinomial{30}, CsrBinomial{45}}, kUnit, rng);
  const auto [cases, controls] = split_marks(mixed);
  const DistanceGrid g = DistanceGrid::uniform(0.3, 6);
  const auto d = d_hat(mixed, g);
  const auto k1 = k_hat(cases, g);
  const auto k2 = k_hat(controls, g);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(d.values[i] == k1.values[i] - k2.values[i]);
}

TEST_CASE("rank envelope rule") {
  CHECK(envelope_rank(39, 0.95) == 1);
  CHECK(envelope_rank(99, 0.95) == 2);
  CHECK(envelope_rank(999, 0.95) == 25);
  CHECK(envelope_rank(99, 0.99) == 1);
  CHECK(envelope_rank(10, 0.95) == 1);

  std::vector<std::vector<double>> reps;
  for (int r = 0; r < 39; ++r) reps.push_back({static_cast<double>(r), static_cast<double>(-r)});
  const Envelope e = rank_envelope(reps, 0.95);
  CHECK(e.lower == std::vector<double>{0.0, -38.0});
  CHECK(e.upper == std::vector<double>{38.0, 0.0});
}

TEST_CASE("rl_envelope is deterministic and ordered") {
  RandomStream rng(8);
  const MarkedPattern mixed = generate_marked({CsrBinomial{30}, CsrBinomial{30}}, kUnit, rng);
  const DistanceGrid g = DistanceGrid::uniform(0.25, 8);
  EnvelopeOptions opt;
  opt.seed = 42;
  const auto a = rl_envelope(mixed, g, LabelStatistic::DHat, opt);
  opt.threads = 3;
  const auto b = rl_envelope(mixed, g, LabelStatistic::DHat, opt);
  CHECK(a.rank_band.lower == b.rank_band.lower);
  CHECK(a.rank_band.upper == b.rank_band.upper);
  CHECK(a.replicates == b.replicates);
  CHECK(a.replicates.size() == 39);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(a.rank_band.lower[i] <= a.rank_band.upper[i]);
    CHECK(a.se_band.lower[i] <= a.se_band.upper[i]);
  }
  opt.replicates = 1;
  CHECK_THROWS_AS(rl_envelope(mixed, g, LabelStatistic::DHat, opt), ConfigError);
}

TEST_CASE("clustered cases exceed the random-labeling envelope") {
  RandomStream rng(1234);
  const ThomasCluster tight{10.0, 0.02, 6.0};
  const MarkedPattern marked = generate_marked({tight, CsrBinomial{60}}, kUnit, rng);
  const DistanceGrid g = DistanceGrid::uniform(0.1, 10);
  EnvelopeOptions opt;
  opt.seed = 5;
  opt.replicates = 99;
  const auto env = rl_envelope(marked, g, LabelStatistic::DHat, opt);
  std::size_t above = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (env.observed.values[i] > env.rank_band.upper[i]) ++above;
  CHECK(above >= 8);
}

TEST_CASE("csr_envelope: Thomas process rises above the band, replicates keep n") {
  RandomStream rng(77);
  const PointPattern clustered = generate_points(ThomasCluster{15, 0.02, 8}, kUnit, rng);
  const DistanceGrid g = DistanceGrid::uniform(0.1, 5);
  EnvelopeOptions opt;
  opt.seed = 9;
  opt.level = 0.99;
  opt.replicates = 99;
  const auto env = csr_envelope(clustered, g, CsrStatistic::LMinusS, opt);
  CHECK(env.observed.values[0] > env.rank_band.upper[0]);
  CHECK(env.observed.info.n == clustered.size());
}

TEST_CASE("function table export") {
  const PointPattern two(kUnit, {{0.35, 0.5}, {0.65, 0.5}});
  std::ostringstream out;
  write_function_table(out, k_hat(two, DistanceGrid({0.2, 0.5})));
  const std::string text = out.str();
  CHECK(text.rfind("s,value,lower,upper,theoretical", 0) == 0);
  CHECK(text.find("\n0.5,1,") != std::string::npos);
}
