#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "stpp/patterns.hpp"
#include "stpp/secondorder.hpp"

namespace stpp {

// Matrix of a space-time statistic indexed (s index, t index). NaN marks
// undefined cells.
class STGrid {
 public:
  STGrid(DistanceGrid s, LagGrid t, double fill = 0.0);

  const DistanceGrid& s() const { return s_; }
  const LagGrid& t() const { return t_; }
  std::size_t rows() const { return s_.size(); }
  std::size_t cols() const { return t_.size(); }

  double& at(std::size_t is, std::size_t it) { return values_[is * t_.size() + it]; }
  double at(std::size_t is, std::size_t it) const { return values_[is * t_.size() + it]; }
  bool defined(std::size_t is, std::size_t it) const { return !std::isnan(at(is, it)); }
  const std::vector<double>& values() const { return values_; }

  bool conforms(const STGrid& other) const { return s_ == other.s_ && t_ == other.t_; }

  static constexpr double kNoData = std::numeric_limits<double>::quiet_NaN();

 private:
  DistanceGrid s_;
  LagGrid t_;
  std::vector<double> values_;
};

// Space-time K with spatial (w_ij) and temporal (v_ij) edge corrections.
// Throws InsufficientDataError for n < 2.
STGrid k_hat_st(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t);

// Temporal K with the v_ij correction.
FunctionEstimate k_hat_time(const STPattern& pattern, const LagGrid& t);

// Spatial K of the event locations; the same code path as k_hat (unbiased).
FunctionEstimate k_hat_space(const STPattern& pattern, const DistanceGrid& s);

// Pointwise band for the temporal K under uniformly distributed event times.
EnvelopeResult k_time_envelope(const STPattern& pattern, const LagGrid& t,
                               const EnvelopeOptions& options);

struct SpaceTimeDifference {
  STGrid d;   // K(s,t) - K1(s) K2(t)
  STGrid k0;  // K1(s) K2(t)
};

// Throws ConfigError when the component grids do not match k_st.
SpaceTimeDifference d_hat_st(const STGrid& k_st, const FunctionEstimate& k1,
                             const FunctionEstimate& k2);

// D / K0 cellwise; NaN where K0 == 0.
STGrid d0_hat_st(const STGrid& d, const STGrid& k0);

struct VarianceGrid {
  STGrid variance;
  STGrid se;
  std::size_t permutations = 0;
};

// Sample variance of D(s,t) over time permutations with locations fixed.
// Throws ConfigError for fewer than 2 permutations.
VarianceGrid variance_grid(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t,
                           std::size_t permutations, std::uint64_t seed, unsigned threads = 1);

// 1e-12 * (mean K0)^2.
double default_variance_floor(const STGrid& k0);

struct ResidualGrid {
  STGrid r;
  std::size_t excluded = 0;
};

// R = D / sqrt(V); cells with V below floor (or V == 0) are NaN and counted.
ResidualGrid residual_grid(const STGrid& d, const STGrid& variance, double floor);

struct UStatistic {
  double value = 0.0;
  std::size_t cells_used = 0;
  std::size_t cells_excluded = 0;
};

// Sum of defined R cells. Throws DegenerateStatisticError when none is defined.
UStatistic u_statistic(const STGrid& r);

enum class Tail {
  Upper,  // positive space-time interaction: rank among the largest
  Lower,  // negative interaction: rank among the smallest
};

const char* tail_name(Tail tail);
const char* interaction_name(Tail tail);

struct MCTestOptions {
  std::size_t replicates = 999;             // m, including the observed value
  std::size_t variance_permutations = 199;  // M, batch that fixes V(s,t)
  std::uint64_t seed = 0;
  Tail tail = Tail::Upper;
  unsigned threads = 1;
};

struct MCTestResult {
  double u_observed = 0.0;
  std::vector<double> u_replicates;  // m - 1 values
  std::size_t m = 0;
  std::size_t rank = 0;
  double p_value = 1.0;
  Tail direction = Tail::Upper;
  std::uint64_t seed = 0;
  double elapsed_seconds = 0.0;
  std::size_t cells_used = 0;
  std::size_t cells_excluded = 0;
};

// Rank of u_observed among itself and the replicates, ties counted against
// significance; p = rank / m.
// "p = <p>, <positive|negative> interaction"
std::string mc_report_line(const MCTestResult& result);

MCTestResult rank_test(double u_observed, std::vector<double> replicates, Tail tail);

// Monte Carlo test of space-time interaction. V(s,t) is estimated once from
// M time permutations and reused for the observed statistic and the m - 1
// permutation replicates.
MCTestResult mc_interaction_test(const STPattern& pattern, const DistanceGrid& s,
                                 const LagGrid& t, const MCTestOptions& options);

struct GaussianTestResult {
  double u = 0.0;
  double variance = 0.0;
  double z = 0.0;
  double p_two_sided = 1.0;
  bool approximate = true;
};

// z = U / sqrt(Var U) with Var U the sample variance of the permutation
// replicates. Throws DegenerateStatisticError when that variance is zero.
GaussianTestResult gaussian_from_replicates(double u_observed, const std::vector<double>& replicates);

// Runs the permutation machinery of mc_interaction_test and standardises U.
GaussianTestResult gaussian_interaction_test(const STPattern& pattern, const DistanceGrid& s,
                                             const LagGrid& t, const MCTestOptions& options);

// Delimited matrix: first row "s\t" header with t values, then one row per s.
void write_st_grid(std::ostream& out, const STGrid& grid);

}  // namespace stpp
