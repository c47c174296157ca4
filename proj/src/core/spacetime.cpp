#include "stpp/spacetime.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "pairs.hpp"
#include "stpp/parallel.hpp"
#include "stpp/random.hpp"

namespace stpp {

namespace {

using detail::ExactSum;

void require_events(const STPattern& pattern, std::size_t minimum) {
  if (pattern.size() < minimum) {
    throw InsufficientDataError(
        fmt::format("space-time analysis needs n >= {}, got {}", minimum, pattern.size()));
  }
}

double pair_scale(std::size_t n) {
  const auto nn = static_cast<double>(n);
  return 1.0 / (nn * (nn - 1.0));
}

// Temporal K values for an arbitrary assignment of times. On sorted times the
// lag to each neighbour grows monotonically away from an event on either side,
// and the edge factor is 1 on a prefix of that order, so each side reduces to
// binary searches with the same floating-point comparisons as a double loop.
std::vector<double> k_time_values(std::span<const double> times, const TimeWindow& tw,
                                  const LagGrid& t) {
  const std::size_t n = times.size();
  std::vector<double> a(times.begin(), times.end());
  std::sort(a.begin(), a.end());
  for (double v : a) {
    if (!tw.contains(v)) {
      throw DomainError(fmt::format("event time {} lies outside [{}, {}]", v, tw.start(), tw.end()));
    }
  }
  std::vector<std::uint64_t> counts(t.size(), 0);
  for (std::size_t p = 0; p < n; ++p) {
    const double ti = a[p];
    const auto interior = [&](double u) { return ti - u > tw.start() && ti + u < tw.end(); };
    // Left neighbours j = p-1, p-2, ...: lag ti - a[j] is non-decreasing.
    const auto left_begin = std::make_reverse_iterator(a.begin() + static_cast<std::ptrdiff_t>(p));
    const auto left_end = a.rend();
    const auto right_begin = a.begin() + static_cast<std::ptrdiff_t>(p) + 1;
    const auto right_end = a.end();
    const auto left_ones = static_cast<std::uint64_t>(
        std::partition_point(left_begin, left_end, [&](double v) { return interior(ti - v); }) - left_begin);
    const auto right_ones = static_cast<std::uint64_t>(
        std::partition_point(right_begin, right_end, [&](double v) { return interior(v - ti); }) - right_begin);
    for (std::size_t k = 0; k < t.size(); ++k) {
      const double lag = t[k];
      const auto left = static_cast<std::uint64_t>(
          std::partition_point(left_begin, left_end, [&](double v) { return ti - v < lag; }) - left_begin);
      const auto right = static_cast<std::uint64_t>(
          std::partition_point(right_begin, right_end, [&](double v) { return v - ti < lag; }) - right_begin);
      counts[k] += left + (left > left_ones ? left - left_ones : 0);
      counts[k] += right + (right > right_ones ? right - right_ones : 0);
    }
  }
  const double scale = tw.length() * pair_scale(n);
  std::vector<double> out(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k) out[k] = scale * static_cast<double>(counts[k]);
  return out;
}

// Spatial pairs of a fixed set of locations, evaluated against any time
// assignment. Used for the observed K(s,t) and for every permutation.
class SpaceTimeEngine {
 public:
  SpaceTimeEngine(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t)
      : s_(s),
        t_(t),
        window_(pattern.time_window()),
        n_(pattern.size()),
        scale_(pattern.window().area() * pattern.time_window().length() * pair_scale(pattern.size())),
        pairs_(detail::collect_pairs(pattern.points(), pattern.window(), s.max())) {
    s_bins_.reserve(pairs_.pairs.size());
    for (const auto& p : pairs_.pairs) s_bins_.push_back(detail::first_exceeding(s.values(), p.distance));
  }

  STGrid k(std::span<const double> times) const {
    const std::size_t ns = s_.size(), nt = t_.size();
    std::vector<ExactSum> hist(ns * nt);
    for (std::size_t k = 0; k < pairs_.pairs.size(); ++k) {
      const std::size_t sb = s_bins_[k];
      if (sb >= ns) continue;
      const auto& p = pairs_.pairs[k];
      const double u = std::abs(times[p.i] - times[p.j]);
      const std::size_t tb = detail::first_exceeding(t_.values(), u);
      if (tb >= nt) continue;
      hist[sb * nt + tb].add(p.weight * temporal_edge_factor(times[p.i], u, window_));
    }
    // Cumulative over both axes: cell (a, b) holds every pair with
    // d < s[a] and u < t[b].
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = 1; b < nt; ++b) hist[a * nt + b].add(hist[a * nt + b - 1]);
    }
    for (std::size_t a = 1; a < ns; ++a) {
      for (std::size_t b = 0; b < nt; ++b) hist[a * nt + b].add(hist[(a - 1) * nt + b]);
    }
    STGrid out(s_, t_);
    for (std::size_t a = 0; a < ns; ++a) {
      for (std::size_t b = 0; b < nt; ++b) out.at(a, b) = scale_ * hist[a * nt + b].value();
    }
    return out;
  }

  std::size_t size() const { return n_; }

 private:
  const DistanceGrid& s_;
  const LagGrid& t_;
  TimeWindow window_;
  std::size_t n_;
  double scale_;
  detail::SpatialPairs pairs_;
  std::vector<std::size_t> s_bins_;
};

STGrid difference(const STGrid& k, const STGrid& k0) {
  STGrid d(k.s(), k.t());
  for (std::size_t a = 0; a < k.rows(); ++a) {
    for (std::size_t b = 0; b < k.cols(); ++b) d.at(a, b) = k.at(a, b) - k0.at(a, b);
  }
  return d;
}

std::vector<double> permuted_times(const STPattern& pattern, RandomStream rng) {
  std::vector<double> times(pattern.times().begin(), pattern.times().end());
  rng.shuffle(std::span<double>(times));
  return times;
}

// D(s,t) for M time permutations, reduced to a per-cell variance with
// Welford's update in permutation order.
STGrid permutation_variance(const STPattern& pattern, const SpaceTimeEngine& engine,
                            const STGrid& k0, std::size_t permutations, const RandomStream& batch,
                            unsigned threads) {
  std::vector<std::vector<double>> draws(permutations);
  parallel_for(permutations, threads, [&](std::size_t r) {
    const auto times = permuted_times(pattern, batch.substream(r));
    draws[r] = difference(engine.k(times), k0).values();
  });
  STGrid variance(k0.s(), k0.t());
  const std::size_t cells = k0.rows() * k0.cols();
  for (std::size_t c = 0; c < cells; ++c) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < permutations; ++r) {
      const double delta = draws[r][c] - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (draws[r][c] - mean);
    }
    variance.at(c / k0.cols(), c % k0.cols()) = m2 / static_cast<double>(permutations - 1);
  }
  return variance;
}

struct Components {
  FunctionEstimate k1;
  FunctionEstimate k2;
  STGrid k0;
};

Components components(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t) {
  Components c{k_hat_space(pattern, s), k_hat_time(pattern, t), STGrid(s, t)};
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < t.size(); ++b) c.k0.at(a, b) = c.k1.values[a] * c.k2.values[b];
  }
  return c;
}

double u_with(const STGrid& d, const STGrid& variance) {
  double sum = 0.0;
  for (std::size_t a = 0; a < d.rows(); ++a) {
    for (std::size_t b = 0; b < d.cols(); ++b) {
      const double v = variance.at(a, b);
      if (!std::isnan(v)) sum += d.at(a, b) / std::sqrt(v);
    }
  }
  return sum;
}

}  // namespace

STGrid::STGrid(DistanceGrid s, LagGrid t, double fill)
    : s_(std::move(s)), t_(std::move(t)), values_(s_.size() * t_.size(), fill) {}

STGrid k_hat_st(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t) {
  require_events(pattern, 2);
  return SpaceTimeEngine(pattern, s, t).k(pattern.times());
}

FunctionEstimate k_hat_time(const STPattern& pattern, const LagGrid& t) {
  require_events(pattern, 2);
  FunctionEstimate out;
  out.abscissa.assign(t.values().begin(), t.values().end());
  out.values = k_time_values(pattern.times(), pattern.time_window(), t);
  std::vector<double> reference;
  for (double lag : t.values()) reference.push_back(2.0 * lag);
  out.theoretical = std::move(reference);
  out.info.estimator = "K2";
  out.info.n = pattern.size();
  out.info.normalization = "unbiased";
  return out;
}

FunctionEstimate k_hat_space(const STPattern& pattern, const DistanceGrid& s) {
  FunctionEstimate out = k_hat(pattern.base(), s, KNormalization::Unbiased);
  out.info.estimator = "K1";
  return out;
}

EnvelopeResult k_time_envelope(const STPattern& pattern, const LagGrid& t,
                               const EnvelopeOptions& options) {
  if (options.replicates < 2) throw ConfigError("envelopes need at least 2 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw ConfigError("envelope level must lie in (0, 1)");
  }
  EnvelopeResult result;
  result.observed = k_hat_time(pattern, t);
  result.observed.info.seed = options.seed;
  const TimeWindow& tw = pattern.time_window();
  const RandomStream root(options.seed);
  result.replicates.resize(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    RandomStream rng = root.substream(r);
    std::vector<double> times(pattern.size());
    for (double& v : times) v = rng.uniform(tw.start(), tw.end());
    result.replicates[r] = k_time_values(times, tw, t);
  });

  const std::size_t ng = t.size(), m = options.replicates;
  result.rank_band = rank_envelope(result.replicates, options.level);
  result.replicate_mean.assign(ng, 0.0);
  result.replicate_sd.assign(ng, 0.0);
  result.se_band = Envelope{std::vector<double>(ng), std::vector<double>(ng), options.level,
                            "mean+-2se"};
  for (std::size_t g = 0; g < ng; ++g) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double x = result.replicates[r][g];
      const double delta = x - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (x - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(m - 1));
    result.replicate_mean[g] = mean;
    result.replicate_sd[g] = sd;
    result.se_band.lower[g] = mean - 2.0 * sd;
    result.se_band.upper[g] = mean + 2.0 * sd;
  }
  result.observed.envelope = result.rank_band;
  result.observed.info.replicates = m;
  return result;
}

SpaceTimeDifference d_hat_st(const STGrid& k_st, const FunctionEstimate& k1,
                             const FunctionEstimate& k2) {
  const auto s = k_st.s().values();
  const auto t = k_st.t().values();
  if (!std::equal(s.begin(), s.end(), k1.abscissa.begin(), k1.abscissa.end()) ||
      !std::equal(t.begin(), t.end(), k2.abscissa.begin(), k2.abscissa.end())) {
    throw ConfigError("K(s,t) grid does not match the component K grids");
  }
  SpaceTimeDifference out{STGrid(k_st.s(), k_st.t()), STGrid(k_st.s(), k_st.t())};
  for (std::size_t a = 0; a < k_st.rows(); ++a) {
    for (std::size_t b = 0; b < k_st.cols(); ++b) {
      out.k0.at(a, b) = k1.values[a] * k2.values[b];
      out.d.at(a, b) = k_st.at(a, b) - out.k0.at(a, b);
    }
  }
  return out;
}

STGrid d0_hat_st(const STGrid& d, const STGrid& k0) {
  if (!d.conforms(k0)) throw ConfigError("D and K0 grids do not conform");
  STGrid out(d.s(), d.t(), STGrid::kNoData);
  for (std::size_t a = 0; a < d.rows(); ++a) {
    for (std::size_t b = 0; b < d.cols(); ++b) {
      if (k0.at(a, b) != 0.0 && !std::isnan(k0.at(a, b))) out.at(a, b) = d.at(a, b) / k0.at(a, b);
    }
  }
  return out;
}

VarianceGrid variance_grid(const STPattern& pattern, const DistanceGrid& s, const LagGrid& t,
                           std::size_t permutations, std::uint64_t seed, unsigned threads) {
  if (permutations < 2) throw ConfigError("variance grid needs at least 2 permutations");
  require_events(pattern, 2);
  const SpaceTimeEngine engine(pattern, s, t);
  const Components comp = components(pattern, s, t);
  VarianceGrid out{permutation_variance(pattern, engine, comp.k0, permutations,
                                        RandomStream(seed).substream(0), threads),
                   STGrid(s, t), permutations};
  for (std::size_t a = 0; a < s.size(); ++a) {
    for (std::size_t b = 0; b < t.size(); ++b) out.se.at(a, b) = std::sqrt(out.variance.at(a, b));
  }
  return out;
}

double default_variance_floor(const STGrid& k0) {
  double sum = 0.0;
  std::size_t count = 0;
  for (double v : k0.values()) {
    if (!std::isnan(v)) {
      sum += v;
      ++count;
    }
  }
  const double mean = count ? sum / static_cast<double>(count) : 0.0;
  return 1e-12 * mean * mean;
}

ResidualGrid residual_grid(const STGrid& d, const STGrid& variance, double floor) {
  if (!d.conforms(variance)) throw ConfigError("D and V grids do not conform");
  ResidualGrid out{STGrid(d.s(), d.t(), STGrid::kNoData), 0};
  for (std::size_t a = 0; a < d.rows(); ++a) {
    for (std::size_t b = 0; b < d.cols(); ++b) {
      const double v = variance.at(a, b);
      if (std::isnan(v) || !(v > 0.0) || v < floor || std::isnan(d.at(a, b))) {
        ++out.excluded;
        continue;
      }
      out.r.at(a, b) = d.at(a, b) / std::sqrt(v);
    }
  }
  return out;
}

UStatistic u_statistic(const STGrid& r) {
  UStatistic u;
  for (double v : r.values()) {
    if (std::isnan(v)) {
      ++u.cells_excluded;
    } else {
      u.value += v;
      ++u.cells_used;
    }
  }
  if (u.cells_used == 0) {
    throw DegenerateStatisticError("U statistic: every residual cell is undefined");
  }
  return u;
}

const char* tail_name(Tail tail) { return tail == Tail::Upper ? "upper" : "lower"; }

const char* interaction_name(Tail tail) {
  return tail == Tail::Upper ? "positive interaction" : "negative interaction";
}

std::string mc_report_line(const MCTestResult& result) {
  return fmt::format("p = {}, {}", format_number(result.p_value), interaction_name(result.direction));
}

MCTestResult rank_test(double u_observed, std::vector<double> replicates, Tail tail) {
  if (replicates.empty()) throw ConfigError("rank test needs at least one replicate");
  MCTestResult result;
  result.u_observed = u_observed;
  result.m = replicates.size() + 1;
  std::size_t at_least_as_extreme = 0;
  for (double u : replicates) {
    if (tail == Tail::Upper ? u >= u_observed : u <= u_observed) ++at_least_as_extreme;
  }
  result.rank = 1 + at_least_as_extreme;
  result.p_value = static_cast<double>(result.rank) / static_cast<double>(result.m);
  result.direction = tail;
  result.u_replicates = std::move(replicates);
  return result;
}

MCTestResult mc_interaction_test(const STPattern& pattern, const DistanceGrid& s,
                                 const LagGrid& t, const MCTestOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  if (options.replicates < 20) {
    throw ConfigError(fmt::format("Monte Carlo test needs m >= 20, got {}", options.replicates));
  }
  if (options.variance_permutations < 2) {
    throw ConfigError("Monte Carlo test needs at least 2 variance permutations");
  }
  require_events(pattern, 3);

  const SpaceTimeEngine engine(pattern, s, t);
  const Components comp = components(pattern, s, t);
  const RandomStream root(options.seed);

  const STGrid variance = permutation_variance(pattern, engine, comp.k0,
                                               options.variance_permutations, root.substream(0),
                                               options.threads);
  const STGrid d_obs = difference(engine.k(pattern.times()), comp.k0);
  const ResidualGrid residuals = residual_grid(d_obs, variance, default_variance_floor(comp.k0));
  const UStatistic u_obs = u_statistic(residuals.r);

  // Excluded cells stay excluded for every replicate.
  STGrid frozen = variance;
  for (std::size_t a = 0; a < frozen.rows(); ++a) {
    for (std::size_t b = 0; b < frozen.cols(); ++b) {
      if (!residuals.r.defined(a, b)) frozen.at(a, b) = STGrid::kNoData;
    }
  }

  const RandomStream batch = root.substream(1);
  std::vector<double> replicates(options.replicates - 1);
  parallel_for(replicates.size(), options.threads, [&](std::size_t r) {
    const auto times = permuted_times(pattern, batch.substream(r));
    replicates[r] = u_with(difference(engine.k(times), comp.k0), frozen);
  });

  MCTestResult result = rank_test(u_obs.value, std::move(replicates), options.tail);
  result.seed = options.seed;
  result.cells_used = u_obs.cells_used;
  result.cells_excluded = u_obs.cells_excluded;
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

GaussianTestResult gaussian_from_replicates(double u_observed,
                                            const std::vector<double>& replicates) {
  if (replicates.size() < 2) throw ConfigError("Gaussian test needs at least 2 replicates");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t r = 0; r < replicates.size(); ++r) {
    const double delta = replicates[r] - mean;
    mean += delta / static_cast<double>(r + 1);
    m2 += delta * (replicates[r] - mean);
  }
  GaussianTestResult out;
  out.u = u_observed;
  out.variance = m2 / static_cast<double>(replicates.size() - 1);
  if (!(out.variance > 0.0)) {
    throw DegenerateStatisticError("U has zero variance under the permutation null");
  }
  out.z = u_observed / std::sqrt(out.variance);
  out.p_two_sided = std::erfc(std::abs(out.z) / std::sqrt(2.0));
  return out;
}

GaussianTestResult gaussian_interaction_test(const STPattern& pattern, const DistanceGrid& s,
                                             const LagGrid& t, const MCTestOptions& options) {
  const MCTestResult mc = mc_interaction_test(pattern, s, t, options);
  return gaussian_from_replicates(mc.u_observed, mc.u_replicates);
}

void write_st_grid(std::ostream& out, const STGrid& grid) {
  out << "s\\t";
  for (double t : grid.t().values()) out << ',' << format_number(t);
  out << '\n';
  for (std::size_t a = 0; a < grid.rows(); ++a) {
    out << format_number(grid.s()[a]);
    for (std::size_t b = 0; b < grid.cols(); ++b) {
      const double v = grid.at(a, b);
      out << ',' << (std::isnan(v) ? std::string("NA") : format_number(v));
    }
    out << '\n';
  }
}

}  // namespace stpp
