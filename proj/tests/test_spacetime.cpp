#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/oracle.hpp"
#include "stpp/spacetime.hpp"
#include "stpp/synth.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);
const TimeWindow kTen(0, 10);

STPattern two_point() {
  return STPattern(PointPattern(kUnit, {{0.35, 0.5}, {0.65, 0.5}}), {4.0, 6.0}, kTen);
}

STPattern random_st(std::size_t n, std::uint64_t seed) {
  RandomStream rng(seed);
  return generate_st(StIndependent{CsrBinomial{n}}, kUnit, kTen, rng);
}

STGrid grid_of(std::vector<double> values) {
  STGrid g(DistanceGrid({0.1, 0.2}), LagGrid({1.0, 2.0}));
  for (std::size_t i = 0; i < 4; ++i) g.at(i / 2, i % 2) = values[i];
  return g;
}

}  // namespace

TEST_CASE("two-point spatio-temporal examples") {
  const STPattern p = two_point();
  const DistanceGrid s({0.5});
  const auto k = k_hat_st(p, s, LagGrid({1.0, 3.0}));
  CHECK(k.at(0, 0) == 0.0);
  CHECK(k.at(0, 1) == doctest::Approx(10.0).epsilon(1e-15));

  const auto k2 = k_hat_time(p, LagGrid({1.0, 3.0}));
  CHECK(k2.values[0] == 0.0);
  CHECK(k2.values[1] == doctest::Approx(10.0).epsilon(1e-15));

  const auto k1 = k_hat_space(p, s);
  CHECK(k1.values[0] == doctest::Approx(1.0).epsilon(1e-15));

  const auto diff = d_hat_st(k_hat_st(p, s, LagGrid({3.0})), k1, k_hat_time(p, LagGrid({3.0})));
  CHECK(diff.d.at(0, 0) == 0.0);
  CHECK(diff.k0.at(0, 0) == doctest::Approx(10.0));

  CHECK_THROWS_AS(k_hat_st(STPattern(PointPattern(kUnit, {{0.5, 0.5}}), {1.0}, kTen), s,
                           LagGrid({1.0})),
                  InsufficientDataError);
}

TEST_CASE("k_hat_space is the spatial estimator") {
  const STPattern p = random_st(80, 3);
  const DistanceGrid s = DistanceGrid::uniform(0.25, 7);
  CHECK(k_hat_space(p, s).values == k_hat(p.base(), s).values);
}

TEST_CASE("k_hat_st and k_hat_time match the naive oracle") {
  RandomStream rng(19);
  for (int trial = 0; trial < 8; ++trial) {
    const std::size_t n = 2 + rng.below(99);
    const STPattern p = generate_st(StIndependent{CsrBinomial{n}}, kUnit, kTen, rng);
    const DistanceGrid s = DistanceGrid::uniform(0.3, 6);
    const LagGrid t = LagGrid::uniform(5.0, 7);
    const auto k = k_hat_st(p, s, t);
    const std::vector<double> sv(s.values().begin(), s.values().end());
    const std::vector<double> tv(t.values().begin(), t.values().end());
    const auto naive = oracle::naive_k_st(p.points(), p.times(), kUnit, 0, 10, sv, tv);
    for (std::size_t i = 0; i < naive.size(); ++i) {
      const double scale = std::max(std::abs(naive[i]), 1e-300);
      CHECK(std::abs(k.values()[i] - naive[i]) / scale < 1e-12);
    }
    const auto k2 = k_hat_time(p, t);
    const auto naive2 = oracle::naive_k_time(p.times(), 0, 10, tv);
    for (std::size_t i = 0; i < tv.size(); ++i)
      CHECK(k2.values[i] == doctest::Approx(naive2[i]).epsilon(1e-12));
  }
}

TEST_CASE("k_hat_st is monotone in both arguments") {
  const STPattern p = random_st(150, 2);
  const auto k = k_hat_st(p, DistanceGrid::uniform(0.3, 9), LagGrid::uniform(5, 9));
  for (std::size_t i = 0; i < k.rows(); ++i)
    for (std::size_t j = 0; j < k.cols(); ++j) {
      if (i > 0) CHECK(k.at(i, j) >= k.at(i - 1, j));
      if (j > 0) CHECK(k.at(i, j) >= k.at(i, j - 1));
    }
}

TEST_CASE("saturated temporal indicator gives K(s,t) / K1(s) = T") {
  // All lags below the smallest t, all events in the interval interior.
  RandomStream rng(10);
  std::vector<Point> pts;
  std::vector<double> times;
  for (int i = 0; i < 30; ++i) {
    pts.push_back({rng.uniform(), rng.uniform()});
    times.push_back(rng.uniform(4.9, 5.1));
  }
  const STPattern p(PointPattern(kUnit, pts), times, kTen);
  const DistanceGrid s = DistanceGrid::uniform(0.3, 5);
  const auto k = k_hat_st(p, s, LagGrid({0.5, 1.0}));
  const auto k1 = k_hat_space(p, s);
  for (std::size_t i = 0; i < s.size(); ++i)
    if (k1.values[i] > 0) CHECK(k.at(i, 0) / k1.values[i] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("d_hat_st and d0_hat_st") {
  const STPattern p = random_st(60, 7);
  const DistanceGrid s = DistanceGrid::uniform(0.2, 4);
  const LagGrid t = LagGrid::uniform(3, 4);
  const auto diff = d_hat_st(k_hat_st(p, s, t), k_hat_space(p, s), k_hat_time(p, t));
  CHECK_THROWS_AS(d_hat_st(k_hat_st(p, s, t), k_hat_space(p, DistanceGrid::uniform(0.2, 3)),
                           k_hat_time(p, t)),
                  ConfigError);

  const auto zero = d0_hat_st(STGrid(s, t, 0.0), diff.k0);
  const auto one = d0_hat_st(diff.k0, diff.k0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (diff.k0.at(i, j) > 0) {
        CHECK(zero.at(i, j) == 0.0);
        CHECK(one.at(i, j) == 1.0);
      } else {
        CHECK_FALSE(zero.defined(i, j));
      }
    }
  CHECK_FALSE(d0_hat_st(STGrid(s, t, 1.0), STGrid(s, t, 0.0)).defined(0, 0));
  CHECK_THROWS_AS(d0_hat_st(STGrid(s, t), STGrid(s, LagGrid({1.0}))), ConfigError);
}

TEST_CASE("origin limit of D") {
  const STPattern p = random_st(100, 12);
  const DistanceGrid s({1e-9, 0.1});
  const LagGrid t({1e-9, 1.0});
  const auto diff = d_hat_st(k_hat_st(p, s, t), k_hat_space(p, s), k_hat_time(p, t));
  CHECK(diff.d.at(0, 0) == 0.0);
}

TEST_CASE("variance grid") {
  std::vector<Point> pts;
  RandomStream rng(5);
  for (int i = 0; i < 20; ++i) pts.push_back({rng.uniform(), rng.uniform()});
  const STPattern constant(PointPattern(kUnit, pts), std::vector<double>(20, 5.0), kTen);
  const DistanceGrid s = DistanceGrid::uniform(0.3, 4);
  const LagGrid t = LagGrid::uniform(4, 4);
  const auto vc = variance_grid(constant, s, t, 20, 1);
  for (double v : vc.variance.values()) CHECK(v == 0.0);

  const STPattern p = random_st(50, 6);
  const auto a = variance_grid(p, s, t, 30, 99);
  const auto b = variance_grid(p, s, t, 30, 99, 4);
  CHECK(a.variance.values() == b.variance.values());
  CHECK(a.permutations == 30);
  for (std::size_t i = 0; i < a.se.values().size(); ++i)
    CHECK(a.se.values()[i] == std::sqrt(a.variance.values()[i]));
  CHECK_THROWS_AS(variance_grid(p, s, t, 1, 99), ConfigError);

  const auto origin = variance_grid(p, DistanceGrid({1e-9}), LagGrid({1e-9}), 10, 3);
  CHECK(origin.variance.at(0, 0) == 0.0);
}

TEST_CASE("residuals and the U statistic") {
  const STGrid ones = grid_of({1, 1, 1, 1});
  const auto r0 = residual_grid(grid_of({0, 0, 0, 0}), ones, 1e-12);
  for (double v : r0.r.values()) CHECK(v == 0.0);
  CHECK(u_statistic(r0.r).value == 0.0);

  const auto low = residual_grid(grid_of({1, 1, 1, 1}), grid_of({1, 0, 1e-20, 4}), 1e-12);
  CHECK(low.excluded == 2);
  CHECK_FALSE(low.r.defined(0, 1));
  CHECK_FALSE(low.r.defined(1, 0));
  CHECK(low.r.at(1, 1) == 0.5);

  const auto u = u_statistic(grid_of({1, 2, 3, 4}));
  CHECK(u.value == 10.0);
  CHECK(u.cells_excluded == 0);
  const auto u6 = u_statistic(grid_of({1, 2, 3, STGrid::kNoData}));
  CHECK(u6.value == 6.0);
  CHECK(u6.cells_excluded == 1);
  CHECK_THROWS_AS(u_statistic(grid_of(std::vector<double>(4, STGrid::kNoData))),
                  DegenerateStatisticError);
  CHECK_THROWS_AS(residual_grid(grid_of({1, 1, 1, 1}), STGrid(DistanceGrid({1.0}), LagGrid({1.0})), 0),
                  ConfigError);
}

TEST_CASE("rank test conventions") {
  std::vector<double> reps(999);
  for (std::size_t i = 0; i < reps.size(); ++i) reps[i] = static_cast<double>(i);
  const auto top = rank_test(5000.0, reps, Tail::Upper);
  CHECK(top.rank == 1);
  CHECK(top.m == 1000);
  CHECK(top.p_value == 0.001);
  const auto bottom = rank_test(5000.0, reps, Tail::Lower);
  CHECK(bottom.p_value == 1.0);
  // Ties count against significance.
  const auto tied = rank_test(998.0, reps, Tail::Upper);
  CHECK(tied.rank == 2);
  CHECK(std::string(interaction_name(Tail::Upper)) == "positive interaction");
}

TEST_CASE("Monte Carlo interaction test") {
  RandomStream rng(404);
  const STPattern planted =
      generate_st(StInteracting{6, 12, 0.03, 0.3, 20}, kUnit, kTen, rng);
  const DistanceGrid s = DistanceGrid::uniform(0.15, 5);
  const LagGrid t = LagGrid::uniform(2, 5);
  MCTestOptions opt;
  opt.replicates = 99;
  opt.variance_permutations = 39;
  opt.seed = 17;
  const auto r = mc_interaction_test(planted, s, t, opt);
  CHECK(r.u_replicates.size() == 98);
  CHECK(r.m == 99);
  CHECK(r.p_value == doctest::Approx(1.0 / 99));
  CHECK(r.rank >= 1);

  opt.threads = 3;
  const auto again = mc_interaction_test(planted, s, t, opt);
  CHECK(again.u_observed == r.u_observed);
  CHECK(again.u_replicates == r.u_replicates);

  opt.replicates = 19;
  CHECK_THROWS_AS(mc_interaction_test(planted, s, t, opt), ConfigError);
  opt.replicates = 99;
  opt.variance_permutations = 1;
  CHECK_THROWS_AS(mc_interaction_test(planted, s, t, opt), ConfigError);
}

TEST_CASE("Gaussian approximation") {
  const auto g = gaussian_from_replicates(2.0, {-1.0, 1.0, -1.0, 1.0});
  CHECK(g.variance == doctest::Approx(4.0 / 3.0));
  CHECK(g.z == doctest::Approx(2.0 / std::sqrt(4.0 / 3.0)));
  CHECK(g.p_two_sided == doctest::Approx(std::erfc(g.z / std::sqrt(2.0))));
  CHECK(g.approximate);
  CHECK_THROWS_AS(gaussian_from_replicates(1.0, {2.0, 2.0, 2.0}), DegenerateStatisticError);

  std::vector<Point> pts;
  RandomStream rng(1);
  for (int i = 0; i < 15; ++i) pts.push_back({rng.uniform(), rng.uniform()});
  const STPattern flat(PointPattern(kUnit, pts), std::vector<double>(15, 3.0), kTen);
  MCTestOptions opt;
  opt.replicates = 39;
  opt.variance_permutations = 9;
  CHECK_THROWS_AS(gaussian_interaction_test(flat, DistanceGrid::uniform(0.3, 3), LagGrid::uniform(3, 3), opt),
                  DegenerateStatisticError);

  const STPattern p = random_st(40, 8);
  const auto z1 = gaussian_interaction_test(p, DistanceGrid::uniform(0.3, 3), LagGrid::uniform(3, 3), opt);
  const auto z2 = gaussian_interaction_test(p, DistanceGrid::uniform(0.3, 3), LagGrid::uniform(3, 3), opt);
  CHECK(z1.z == z2.z);
}

TEST_CASE("space-time grid export") {
  std::ostringstream out;
  write_st_grid(out, grid_of({1, 2, 3, STGrid::kNoData}));
  const std::string text = out.str();
  CHECK(text.find("NA") != std::string::npos);
  CHECK(text.find("0.1,1,2") != std::string::npos);
}
