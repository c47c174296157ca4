#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "stpp/geometry.hpp"

namespace stpp::detail {

__extension__ using Int128 = __int128;

// Fixed-point accumulator with 2^-52 resolution. Sums of edge weights (each
// in [1, 2048)) become exact and independent of summation order, so estimates
// depend only on the multiset of pairs.
class ExactSum {
 public:
  static constexpr double kScale = 0x1.0p52;

  void add(double w) { acc_ += static_cast<Int128>(std::llround(w * kScale)); }
  void add(const ExactSum& other) { acc_ += other.acc_; }
  double value() const { return static_cast<double>(acc_) / kScale; }
  bool operator==(const ExactSum&) const = default;

 private:
  Int128 acc_ = 0;
};

struct SpatialPair {
  std::uint32_t i = 0;
  std::uint32_t j = 0;
  double distance = 0.0;
  double weight = 1.0;
};

struct SpatialPairs {
  std::vector<SpatialPair> pairs;  // ordered (i, j), i != j, sorted by (i, j)
  std::size_t clamped = 0;         // pairs whose edge weight hit the floor
};

// Ordered pairs with distance strictly below max_distance, found through a
// uniform grid index with cells no smaller than max_distance.
SpatialPairs collect_pairs(std::span<const Point> points, const Window& window,
                           double max_distance);

// Index of the first grid value strictly greater than x; the pair then
// counts toward every grid value from that index on.
std::size_t first_exceeding(std::span<const double> grid, double x);

}  // namespace stpp::detail
