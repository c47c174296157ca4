#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include "stpp/geometry.hpp"
#include "stpp/patterns.hpp"
#include "stpp/random.hpp"

namespace stpp {

// Exactly n i.i.d. uniform points (binomial process).
struct CsrBinomial {
  std::size_t n = 0;
};

// Homogeneous Poisson: count ~ Poisson(rate * |A|), then uniform locations.
struct PoissonCount {
  double rate = 0.0;
};

// Lewis-Shedler thinning of a Poisson(rate_max) process: a candidate at x is
// kept with probability rate(x) / rate_max.
struct InhomogeneousThinning {
  double rate_max = 0.0;
  std::function<double(Point)> rate;
};

// Poisson(parent_rate * |A|) parents, each with Poisson(mean_offspring)
// Gaussian(sigma) offspring. Offspring outside the window are dropped.
struct ThomasCluster {
  double parent_rate = 0.0;
  double sigma = 0.0;
  double mean_offspring = 0.0;
};

using SpatialLaw = std::variant<CsrBinomial, PoissonCount, InhomogeneousThinning, ThomasCluster>;

// Cases and controls drawn independently and superposed into one marked
// pattern (cases first).
struct LabeledSuperposition {
  SpatialLaw cases;
  SpatialLaw controls;
};

struct UniformTimes {};

// Times drawn around `centers` uniform epochs with Gaussian(sigma) spread,
// redrawn until they fall inside the time window.
struct ClusteredTimes {
  std::size_t centers = 1;
  double sigma = 0.0;
};

using TemporalLaw = std::variant<UniformTimes, ClusteredTimes>;

// Locations and times drawn independently: no space-time interaction.
struct StIndependent {
  SpatialLaw space;
  TemporalLaw time = UniformTimes{};
};

// Poisson(cluster_count) space-time centres; each emits Poisson(mean_offspring)
// events scattered Gaussian(sigma) in space and Gaussian(sigma_t) in time
// around the centre, so events near in space are near in time. `background`
// extra events are uniform in space and time.
struct StInteracting {
  double cluster_count = 0.0;
  double mean_offspring = 0.0;
  double sigma = 0.0;
  double sigma_t = 0.0;
  std::size_t background = 0;
};

using GeneratorKind = std::variant<CsrBinomial, PoissonCount, InhomogeneousThinning,
                                   ThomasCluster, LabeledSuperposition, StIndependent,
                                   StInteracting>;

struct GeneratorSpec {
  GeneratorKind kind;
  std::uint64_t seed = 0;
};

const char* generator_kind_name(const GeneratorKind& kind);

using GeneratedPattern = std::variant<PointPattern, MarkedPattern, STPattern>;

// Pure function of (spec, window, time_window). Space-time kinds require a
// time window. Throws ConfigError for invalid parameters.
GeneratedPattern generate(const GeneratorSpec& spec, const Window& window,
                          const std::optional<TimeWindow>& time_window = std::nullopt);

PointPattern generate_points(const SpatialLaw& law, const Window& window, RandomStream& rng);
MarkedPattern generate_marked(const LabeledSuperposition& law, const Window& window,
                              RandomStream& rng);
STPattern generate_st(const StIndependent& law, const Window& window,
                      const TimeWindow& time_window, RandomStream& rng);
STPattern generate_st(const StInteracting& law, const Window& window,
                      const TimeWindow& time_window, RandomStream& rng);

Point uniform_point(const Window& window, RandomStream& rng);

// Random-labelling null: same locations, marks uniformly permuted.
MarkedPattern random_relabel(const MarkedPattern& pattern, std::uint64_t seed);
MarkedPattern random_relabel(const MarkedPattern& pattern, RandomStream& rng);

// Same locations, times uniformly permuted.
STPattern permute_times(const STPattern& pattern, std::uint64_t seed);
STPattern permute_times(const STPattern& pattern, RandomStream& rng);

}  // namespace stpp
