#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stpp/errors.hpp"
#include "stpp/patterns.hpp"

namespace stpp {

// Strictly increasing, positive abscissa. The tag keeps distance and
// time-lag grids from being mixed up.
template <typename Tag>
class AxisGrid {
 public:
  explicit AxisGrid(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw ConfigError("grid needs at least one value");
    for (std::size_t k = 0; k < values_.size(); ++k) {
      if (!(values_[k] > 0.0) || !std::isfinite(values_[k])) {
        throw ConfigError("grid values must be positive and finite");
      }
      if (k > 0 && !(values_[k] > values_[k - 1])) {
        throw ConfigError("grid values must be strictly increasing");
      }
    }
  }

  // `count` equally spaced values max/count, 2 max/count, ..., max.
  static AxisGrid uniform(double max, std::size_t count) {
    if (count == 0) throw ConfigError("grid needs at least one value");
    std::vector<double> v(count);
    for (std::size_t k = 0; k < count; ++k) {
      v[k] = max * static_cast<double>(k + 1) / static_cast<double>(count);
    }
    return AxisGrid(std::move(v));
  }

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double max() const { return values_.back(); }
  friend bool operator==(const AxisGrid&, const AxisGrid&) = default;

 private:
  std::vector<double> values_;
};

using DistanceGrid = AxisGrid<struct DistanceAxisTag>;
using LagGrid = AxisGrid<struct LagAxisTag>;

inline constexpr double kDefaultDistanceFraction = 0.25;

// Uniform grid up to fraction * window diameter.
DistanceGrid default_distance_grid(const Window& window, std::size_t count = 10,
                                   double fraction = kDefaultDistanceFraction);
// Throws ConfigError when the grid reaches beyond fraction * diameter.
void check_distance_grid(const DistanceGrid& grid, const Window& window,
                         double fraction = kDefaultDistanceFraction);

enum class KNormalization {
  // |A| / (n (n - 1)) * sum w_ij I(d_ij < s)
  Unbiased,
  // lambda^-1 * sum / N with lambda = N / |A|, i.e. |A| / N^2 * sum
  PointCount,
};

const char* normalization_name(KNormalization normalization);
KNormalization parse_normalization(const std::string& text);

struct Envelope {
  std::vector<double> lower;
  std::vector<double> upper;
  double level = 0.0;
  std::string method;  // "rank" or "mean+-2se"
};

struct EstimateInfo {
  std::string estimator;
  std::size_t n = 0;
  std::string normalization;
  std::size_t replicates = 0;
  std::optional<std::uint64_t> seed;
  std::size_t clamped_weights = 0;
};

// A statistic sampled on a distance or lag grid.
struct FunctionEstimate {
  std::vector<double> abscissa;
  std::vector<double> values;
  std::optional<Envelope> envelope;
  std::optional<std::vector<double>> theoretical;
  EstimateInfo info;
};

// Ripley's K with isotropic edge correction; I(d < s) is strict.
// Throws InsufficientDataError for n < 2.
FunctionEstimate k_hat(const PointPattern& pattern, const DistanceGrid& grid,
                       KNormalization normalization = KNormalization::Unbiased);

// L(s) - s with L = sqrt(K / pi). Throws DomainError on negative K.
FunctionEstimate l_hat(const FunctionEstimate& k);

// D(s) = K_cases(s) - K_controls(s). Needs >= 2 points in each class.
FunctionEstimate d_hat(const MarkedPattern& pattern, const DistanceGrid& grid,
                       KNormalization normalization = KNormalization::Unbiased);

enum class LabelStatistic { DHat, KCases, KControls };
enum class CsrStatistic { K, LMinusS };

struct EnvelopeOptions {
  std::size_t replicates = 39;
  double level = 0.95;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  KNormalization normalization = KNormalization::Unbiased;
};

struct EnvelopeResult {
  // Observed statistic, with the rank envelope attached.
  FunctionEstimate observed;
  Envelope rank_band;
  Envelope se_band;
  std::vector<double> replicate_mean;
  std::vector<double> replicate_sd;
  std::vector<std::vector<double>> replicates;  // [replicate][grid index]
};

// Pointwise two-sided rank envelope: the k-th smallest and k-th largest of m
// replicates with k = floor((m + 1) (1 - level) / 2), at least 1.
Envelope rank_envelope(const std::vector<std::vector<double>>& replicates, double level);
std::size_t envelope_rank(std::size_t replicates, double level);

// Marks permuted over fixed locations. Throws ConfigError for m < 2.
EnvelopeResult rl_envelope(const MarkedPattern& pattern, const DistanceGrid& grid,
                           LabelStatistic statistic, const EnvelopeOptions& options);

// Binomial CSR replicates with the same n in the same window.
EnvelopeResult csr_envelope(const PointPattern& pattern, const DistanceGrid& grid,
                            CsrStatistic statistic, const EnvelopeOptions& options);

// Columns: s,value,lower,upper,theoretical (empty cells when absent).
void write_function_table(std::ostream& out, const FunctionEstimate& estimate,
                          const std::string& abscissa_name = "s");

}  // namespace stpp
