#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace stpp {

// Philox4x32-10 block function (Salmon et al., "Parallel random numbers: as
// easy as 1, 2, 3"). Stateless: maps (counter, key) to four 32-bit words.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;
  using Block = std::array<std::uint32_t, 4>;

  static constexpr int kRounds = 10;
  static Block encrypt(Counter counter, Key key);
};

// Seeded stream over Philox. The 64-bit seed is the key, the upper half of
// the counter carries the stream id and the lower half the position, so
// substreams never overlap and draws never depend on scheduling order.
//
// Stream naming is versioned: bumping kStreamVersion changes every draw.
class RandomStream {
 public:
  static constexpr std::uint32_t kStreamVersion = 1;

  explicit RandomStream(std::uint64_t seed, std::uint64_t stream_id = 0);

  // Independent child stream; pure function of (seed, stream id, index).
  RandomStream substream(std::uint64_t index) const;

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer on [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  std::uint64_t poisson(double mean);

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t position_ = 0;
  Philox4x32::Block buffer_{};
  int buffered_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_normal_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace stpp
