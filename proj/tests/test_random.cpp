#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stpp/random.hpp"

using stpp::Philox4x32;
using stpp::RandomStream;

TEST_CASE("philox4x32-10 known-answer vectors") {
  // Reference vectors distributed with Random123.
  CHECK(Philox4x32::encrypt({0, 0, 0, 0}, {0, 0}) ==
        Philox4x32::Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox4x32::encrypt({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                            {0xffffffff, 0xffffffff}) ==
        Philox4x32::Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox4x32::encrypt({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                            {0xa4093822, 0x299f31d0}) ==
        Philox4x32::Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are reproducible and substreams are distinct") {
  RandomStream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  const RandomStream root(42);
  RandomStream s0 = root.substream(0), s0_again = root.substream(0), s1 = root.substream(1);
  const auto x0 = s0.next_u64();
  CHECK(x0 == s0_again.next_u64());
  CHECK(x0 != s1.next_u64());
  CHECK(RandomStream(43).next_u64() != RandomStream(42).next_u64());
}

TEST_CASE("uniform, below and normal have the right moments") {
  RandomStream rng(7);
  const int n = 200000;
  double sum = 0.0, sum_sq = 0.0, nsum = 0.0, nsum_sq = 0.0;
  std::vector<int> counts(5, 0);
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
    sum_sq += u * u;
    ++counts[rng.below(5)];
    const double z = rng.normal();
    nsum += z;
    nsum_sq += z * z;
  }
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sum_sq / n - (sum / n) * (sum / n) == doctest::Approx(1.0 / 12).epsilon(0.02));
  for (int c : counts) CHECK(c == doctest::Approx(n / 5.0).epsilon(0.03));
  CHECK(std::abs(nsum / n) < 0.01);
  CHECK(nsum_sq / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("poisson draws match mean and variance, including chunked large means") {
  for (double mean : {0.5, 4.0, 250.0}) {
    RandomStream rng(11);
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      const auto k = static_cast<double>(rng.poisson(mean));
      sum += k;
      sum_sq += k * k;
    }
    const double m = sum / n;
    const double var = sum_sq / n - m * m;
    // 5 standard errors of the sample mean / variance.
    CHECK(std::abs(m - mean) < 5.0 * std::sqrt(mean / n));
    CHECK(std::abs(var - mean) < 5.0 * mean * std::sqrt(2.0 / n) + 5.0 * std::sqrt(mean / n));
  }
  RandomStream rng(1);
  CHECK(rng.poisson(0.0) == 0);
}

TEST_CASE("shuffle preserves the multiset") {
  RandomStream rng(3);
  std::vector<int> v{1, 2, 2, 3, 5, 8};
  auto sorted = v;
  rng.shuffle(std::span<int>(v));
  std::sort(v.begin(), v.end());
  CHECK(v == sorted);
}
