#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "stpp/errors.hpp"
#include "stpp/oracle.hpp"
#include "stpp/secondorder.hpp"
#include "stpp/synth.hpp"

using namespace stpp;

namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);
const TimeWindow kTen(0, 10);

}  // namespace

TEST_CASE("csr-binomial yields exactly n in-window points") {
  const auto out = generate({CsrBinomial{50}, 1}, kUnit);
  const auto& p = std::get<PointPattern>(out);
  CHECK(p.size() == 50);
  for (const Point& q : p.points()) CHECK(kUnit.contains(q));

  const Window tri = Window::polygon({{0, 0}, {4, 0}, {0, 1}});
  const auto& pt = std::get<PointPattern>(generate({CsrBinomial{300}, 2}, tri));
  for (const Point& q : pt.points()) CHECK(tri.contains(q));
}

TEST_CASE("generators are pure functions of spec and seed") {
  const GeneratorSpec spec{ThomasCluster{20, 0.03, 5}, 77};
  const auto a = std::get<PointPattern>(generate(spec, kUnit));
  const auto b = std::get<PointPattern>(generate(spec, kUnit));
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].x == b[i].x);
    CHECK(a[i].y == b[i].y);
  }
  const GeneratorSpec st{StInteracting{5, 8, 0.04, 0.5, 10}, 3};
  const auto s1 = std::get<STPattern>(generate(st, kUnit, kTen));
  const auto s2 = std::get<STPattern>(generate(st, kUnit, kTen));
  CHECK(std::equal(s1.times().begin(), s1.times().end(), s2.times().begin(), s2.times().end()));
  CHECK(std::string(generator_kind_name(st.kind)) == "st-interacting");
}

TEST_CASE("invalid parameters are config errors") {
  CHECK_THROWS_AS(generate({CsrBinomial{0}, 1}, kUnit), ConfigError);
  CHECK_THROWS_AS(generate({PoissonCount{-1}, 1}, kUnit), ConfigError);
  CHECK_THROWS_AS(generate({ThomasCluster{5, 0, 3}, 1}, kUnit), ConfigError);
  CHECK_THROWS_AS(generate({StIndependent{CsrBinomial{10}}, 1}, kUnit), ConfigError);
  CHECK_THROWS_AS(generate({InhomogeneousThinning{10, nullptr}, 1}, kUnit), ConfigError);
}

TEST_CASE("constant-rate thinning has the Poisson count distribution") {
  RandomStream rng(2023);
  const double rate = 60;
  std::vector<double> thinned, poisson;
  for (int i = 0; i < 500; ++i) {
    thinned.push_back(static_cast<double>(
        generate_points(InhomogeneousThinning{rate, [rate](Point) { return rate; }}, kUnit, rng)
            .size()));
    poisson.push_back(static_cast<double>(generate_points(PoissonCount{rate}, kUnit, rng).size()));
  }
  CHECK(oracle::ks_statistic(thinned, poisson) < oracle::ks_critical_value(0.01, 500, 500));
  double mean = 0;
  for (double c : poisson) mean += c / 500;
  CHECK(std::abs(mean - rate) < 4 * std::sqrt(rate / 500));
}

TEST_CASE("thinning follows the rate surface") {
  RandomStream rng(5);
  std::size_t left = 0, total = 0;
  for (int i = 0; i < 50; ++i) {
    const auto p = generate_points(InhomogeneousThinning{200, [](Point q) { return 200 * q.x; }}, kUnit, rng);
    for (const Point& q : p.points()) {
      left += q.x < 0.5;
      ++total;
    }
  }
  // Expected share left of x = 0.5 is 1/4.
  CHECK(std::abs(static_cast<double>(left) / static_cast<double>(total) - 0.25) < 0.02);
}

TEST_CASE("Thomas process is clustered at small distances") {
  const DistanceGrid g({0.02, 0.04});
  double mean_ratio = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto p = std::get<PointPattern>(generate({ThomasCluster{25, 0.02, 8}, seed}, kUnit));
    const auto k = k_hat(p, g);
    mean_ratio += k.values[0] / (std::numbers::pi * 0.02 * 0.02) / 10;
  }
  CHECK(mean_ratio > 3.0);
}

TEST_CASE("labeled superposition places cases first") {
  const auto m = std::get<MarkedPattern>(generate({LabeledSuperposition{CsrBinomial{4}, CsrBinomial{6}}, 8}, kUnit));
  CHECK(m.count(Mark::Case) == 4);
  CHECK(m.count(Mark::Control) == 6);
  for (std::size_t i = 0; i < 4; ++i) CHECK(m.marks()[i] == Mark::Case);
}

TEST_CASE("space-time generators respect both windows") {
  RandomStream rng(6);
  const auto indep = generate_st(StIndependent{PoissonCount{100}, ClusteredTimes{3, 0.5}}, kUnit, kTen, rng);
  const auto inter = generate_st(StInteracting{5, 10, 0.05, 0.5, 30}, kUnit, kTen, rng);
  for (const STPattern* p : {&indep, &inter})
    for (double t : p->times()) CHECK((t >= 0 && t <= 10));
  CHECK(inter.size() >= 30);
}

TEST_CASE("random relabeling preserves the mark multiset and is uniform") {
  RandomStream rng(13);
  const PointPattern pts = generate_points(CsrBinomial{10}, kUnit, rng);
  std::vector<Mark> marks(10, Mark::Control);
  std::fill(marks.begin(), marks.begin() + 4, Mark::Case);
  const MarkedPattern m(pts, marks);
  const auto r = random_relabel(m, 99);
  CHECK(r.count(Mark::Case) == 4);
  CHECK(r.count(Mark::Control) == 6);
  for (std::size_t i = 0; i < 10; ++i) CHECK(r.points()[i].x == m.points()[i].x);

  const MarkedPattern single(PointPattern(kUnit, {{0.5, 0.5}}), {Mark::Case});
  CHECK(random_relabel(single, 1).marks()[0] == Mark::Case);

  const PointPattern five = generate_points(CsrBinomial{5}, kUnit, rng);
  const MarkedPattern base(five, {Mark::Case, Mark::Case, Mark::Control, Mark::Control, Mark::Control});
  std::map<unsigned, int> freq;
  RandomStream stream(2);
  for (int i = 0; i < 10000; ++i) {
    const auto rl = random_relabel(base, stream);
    unsigned key = 0;
    for (std::size_t k = 0; k < 5; ++k) key |= (rl.marks()[k] == Mark::Case ? 1u : 0u) << k;
    ++freq[key];
  }
  CHECK(freq.size() == 10);
  for (const auto& [key, count] : freq) CHECK(std::abs(count / 10000.0 - 0.1) <= 0.02);
}

TEST_CASE("time permutation preserves the multiset and is uniform") {
  RandomStream rng(1);
  const PointPattern pts = generate_points(CsrBinomial{3}, kUnit, rng);
  const STPattern p(pts, {1.0, 2.0, 3.0}, kTen);
  std::map<std::vector<double>, int> freq;
  RandomStream stream(4);
  for (int i = 0; i < 6000; ++i) {
    const auto q = permute_times(p, stream);
    std::vector<double> t(q.times().begin(), q.times().end());
    CHECK(q.points()[0].x == p.points()[0].x);
    ++freq[t];
  }
  CHECK(freq.size() == 6);
  for (const auto& [t, count] : freq) CHECK(std::abs(count / 6000.0 - 1.0 / 6) <= 0.02);

  const STPattern one(PointPattern(kUnit, {{0.1, 0.1}}), {7.0}, kTen);
  CHECK(permute_times(one, 5).times()[0] == 7.0);
}
