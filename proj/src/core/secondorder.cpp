#include "stpp/secondorder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include <fmt/format.h>

#include "pairs.hpp"
#include "stpp/parallel.hpp"
#include "stpp/synth.hpp"

namespace stpp {

namespace {

using detail::ExactSum;

double k_scale(double area, std::size_t n, KNormalization normalization) {
  const auto nn = static_cast<double>(n);
  return normalization == KNormalization::Unbiased ? area / (nn * (nn - 1.0)) : area / (nn * nn);
}

std::vector<double> cumulative(const std::vector<ExactSum>& bins, double scale) {
  std::vector<double> out(bins.size());
  ExactSum running;
  for (std::size_t k = 0; k < bins.size(); ++k) {
    running.add(bins[k]);
    out[k] = scale * running.value();
  }
  return out;
}

std::vector<double> csr_reference(std::span<const double> s) {
  std::vector<double> out;
  out.reserve(s.size());
  for (double v : s) out.push_back(std::numbers::pi * v * v);
  return out;
}

std::vector<double> l_minus_s(std::span<const double> s, std::span<const double> k) {
  std::vector<double> out(k.size());
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 0.0) throw DomainError("L transform of a negative K value");
    out[i] = std::sqrt(k[i] / std::numbers::pi) - s[i];
  }
  return out;
}

// Pairs of the full marked pattern, reused for every relabelling: only the
// same-class filter changes between replicates.
class LabelEngine {
 public:
  LabelEngine(const MarkedPattern& pattern, const DistanceGrid& grid)
      : grid_(grid),
        area_(pattern.window().area()),
        pairs_(detail::collect_pairs(pattern.points(), pattern.window(), grid.max())),
        n_cases_(pattern.count(Mark::Case)),
        n_controls_(pattern.count(Mark::Control)) {
    bins_.reserve(pairs_.pairs.size());
    for (const auto& p : pairs_.pairs) bins_.push_back(detail::first_exceeding(grid.values(), p.distance));
  }

  std::size_t clamped() const { return pairs_.clamped; }

  // K for cases and controls under the given mark assignment.
  std::pair<std::vector<double>, std::vector<double>> k_per_class(
      std::span<const Mark> marks, KNormalization normalization) const {
    const std::size_t ns = grid_.size();
    std::vector<ExactSum> case_bins(ns), control_bins(ns);
    for (std::size_t k = 0; k < pairs_.pairs.size(); ++k) {
      const auto& p = pairs_.pairs[k];
      if (bins_[k] >= ns || marks[p.i] != marks[p.j]) continue;
      (marks[p.i] == Mark::Case ? case_bins : control_bins)[bins_[k]].add(p.weight);
    }
    return {cumulative(case_bins, k_scale(area_, n_cases_, normalization)),
            cumulative(control_bins, k_scale(area_, n_controls_, normalization))};
  }

 private:
  const DistanceGrid& grid_;
  double area_;
  detail::SpatialPairs pairs_;
  std::vector<std::size_t> bins_;
  std::size_t n_cases_;
  std::size_t n_controls_;
};

void require_two_per_class(const MarkedPattern& pattern) {
  const std::size_t cases = pattern.count(Mark::Case);
  const std::size_t controls = pattern.count(Mark::Control);
  if (cases < 2 || controls < 2) {
    throw InsufficientDataError(fmt::format(
        "D-function needs at least 2 cases and 2 controls; got {} and {}", cases, controls));
  }
}

std::vector<double> label_statistic(const LabelEngine& engine, std::span<const Mark> marks,
                                    LabelStatistic statistic, KNormalization normalization) {
  auto [k_cases, k_controls] = engine.k_per_class(marks, normalization);
  switch (statistic) {
    case LabelStatistic::KCases: return k_cases;
    case LabelStatistic::KControls: return k_controls;
    case LabelStatistic::DHat: break;
  }
  for (std::size_t i = 0; i < k_cases.size(); ++i) k_cases[i] -= k_controls[i];
  return k_cases;
}

void summarize(EnvelopeResult& result, double level) {
  const auto& reps = result.replicates;
  const std::size_t m = reps.size();
  const std::size_t ng = result.observed.values.size();
  result.rank_band = rank_envelope(reps, level);
  result.replicate_mean.assign(ng, 0.0);
  result.replicate_sd.assign(ng, 0.0);
  result.se_band = Envelope{std::vector<double>(ng), std::vector<double>(ng), level, "mean+-2se"};
  for (std::size_t g = 0; g < ng; ++g) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
      const double delta = reps[r][g] - mean;
      mean += delta / static_cast<double>(r + 1);
      m2 += delta * (reps[r][g] - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(m - 1));
    result.replicate_mean[g] = mean;
    result.replicate_sd[g] = sd;
    result.se_band.lower[g] = mean - 2.0 * sd;
    result.se_band.upper[g] = mean + 2.0 * sd;
  }
  result.observed.envelope = result.rank_band;
  result.observed.info.replicates = m;
}

void check_envelope_options(const EnvelopeOptions& options) {
  if (options.replicates < 2) throw ConfigError("envelopes need at least 2 replicates");
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw ConfigError("envelope level must lie in (0, 1)");
  }
}

}  // namespace

DistanceGrid default_distance_grid(const Window& window, std::size_t count, double fraction) {
  return DistanceGrid::uniform(fraction * window.diameter(), count);
}

void check_distance_grid(const DistanceGrid& grid, const Window& window, double fraction) {
  const double limit = fraction * window.diameter();
  if (grid.max() > limit * (1.0 + 1e-12)) {
    throw ConfigError(fmt::format("distance grid reaches {} beyond {} of the window diameter ({})",
                                  grid.max(), fraction, limit));
  }
}

const char* normalization_name(KNormalization normalization) {
  return normalization == KNormalization::Unbiased ? "unbiased" : "point-count";
}

KNormalization parse_normalization(const std::string& text) {
  if (text == "unbiased") return KNormalization::Unbiased;
  if (text == "point-count") return KNormalization::PointCount;
  throw ConfigError(fmt::format("unknown K normalization '{}'", text));
}

FunctionEstimate k_hat(const PointPattern& pattern, const DistanceGrid& grid,
                       KNormalization normalization) {
  const std::size_t n = pattern.size();
  if (n < 2) throw InsufficientDataError(fmt::format("K-function needs n >= 2, got {}", n));
  const auto pairs = detail::collect_pairs(pattern.points(), pattern.window(), grid.max());
  std::vector<ExactSum> bins(grid.size());
  for (const auto& p : pairs.pairs) {
    const std::size_t k = detail::first_exceeding(grid.values(), p.distance);
    if (k < bins.size()) bins[k].add(p.weight);
  }
  FunctionEstimate out;
  out.abscissa.assign(grid.values().begin(), grid.values().end());
  out.values = cumulative(bins, k_scale(pattern.window().area(), n, normalization));
  out.theoretical = csr_reference(grid.values());
  out.info.estimator = "K";
  out.info.n = n;
  out.info.normalization = normalization_name(normalization);
  out.info.clamped_weights = pairs.clamped;
  return out;
}

FunctionEstimate l_hat(const FunctionEstimate& k) {
  FunctionEstimate out = k;
  out.values = l_minus_s(k.abscissa, k.values);
  if (k.envelope) {
    out.envelope->lower = l_minus_s(k.abscissa, k.envelope->lower);
    out.envelope->upper = l_minus_s(k.abscissa, k.envelope->upper);
  }
  out.theoretical = std::vector<double>(k.abscissa.size(), 0.0);
  out.info.estimator = "L-s";
  return out;
}

FunctionEstimate d_hat(const MarkedPattern& pattern, const DistanceGrid& grid,
                       KNormalization normalization) {
  require_two_per_class(pattern);
  const LabelEngine engine(pattern, grid);
  FunctionEstimate out;
  out.abscissa.assign(grid.values().begin(), grid.values().end());
  out.values = label_statistic(engine, pattern.marks(), LabelStatistic::DHat, normalization);
  out.theoretical = std::vector<double>(grid.size(), 0.0);
  out.info.estimator = "D";
  out.info.n = pattern.size();
  out.info.normalization = normalization_name(normalization);
  out.info.clamped_weights = engine.clamped();
  return out;
}

std::size_t envelope_rank(std::size_t replicates, double level) {
  const double raw = static_cast<double>(replicates + 1) * (1.0 - level) / 2.0;
  const auto k = static_cast<std::size_t>(std::floor(raw + 1e-9));
  return std::clamp<std::size_t>(k, 1, std::max<std::size_t>(1, replicates / 2));
}

Envelope rank_envelope(const std::vector<std::vector<double>>& replicates, double level) {
  if (replicates.size() < 2) throw ConfigError("rank envelope needs at least 2 replicates");
  const std::size_t m = replicates.size();
  const std::size_t ng = replicates.front().size();
  const std::size_t k = envelope_rank(m, level);
  Envelope env{std::vector<double>(ng), std::vector<double>(ng), level, "rank"};
  std::vector<double> column(m);
  for (std::size_t g = 0; g < ng; ++g) {
    for (std::size_t r = 0; r < m; ++r) column[r] = replicates[r][g];
    std::sort(column.begin(), column.end());
    env.lower[g] = column[k - 1];
    env.upper[g] = column[m - k];
  }
  return env;
}

EnvelopeResult rl_envelope(const MarkedPattern& pattern, const DistanceGrid& grid,
                           LabelStatistic statistic, const EnvelopeOptions& options) {
  check_envelope_options(options);
  require_two_per_class(pattern);
  const LabelEngine engine(pattern, grid);

  EnvelopeResult result;
  FunctionEstimate& obs = result.observed;
  obs.abscissa.assign(grid.values().begin(), grid.values().end());
  obs.values = label_statistic(engine, pattern.marks(), statistic, options.normalization);
  obs.theoretical = statistic == LabelStatistic::DHat ? std::vector<double>(grid.size(), 0.0)
                                                      : csr_reference(grid.values());
  obs.info.estimator = statistic == LabelStatistic::DHat   ? "D"
                       : statistic == LabelStatistic::KCases ? "K-cases"
                                                             : "K-controls";
  obs.info.n = pattern.size();
  obs.info.normalization = normalization_name(options.normalization);
  obs.info.seed = options.seed;
  obs.info.clamped_weights = engine.clamped();

  const RandomStream root(options.seed);
  result.replicates.resize(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    RandomStream rng = root.substream(r);
    std::vector<Mark> marks(pattern.marks().begin(), pattern.marks().end());
    rng.shuffle(std::span<Mark>(marks));
    result.replicates[r] = label_statistic(engine, marks, statistic, options.normalization);
  });
  summarize(result, options.level);
  return result;
}

EnvelopeResult csr_envelope(const PointPattern& pattern, const DistanceGrid& grid,
                            CsrStatistic statistic, const EnvelopeOptions& options) {
  check_envelope_options(options);
  auto transform = [&](const FunctionEstimate& k) {
    return statistic == CsrStatistic::K ? k.values : l_minus_s(k.abscissa, k.values);
  };

  EnvelopeResult result;
  const FunctionEstimate k_obs = k_hat(pattern, grid, options.normalization);
  result.observed = statistic == CsrStatistic::K ? k_obs : l_hat(k_obs);
  result.observed.info.seed = options.seed;

  const RandomStream root(options.seed);
  const CsrBinomial law{pattern.size()};
  result.replicates.resize(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    RandomStream rng = root.substream(r);
    const PointPattern replicate = generate_points(law, pattern.window(), rng);
    result.replicates[r] = transform(k_hat(replicate, grid, options.normalization));
  });
  summarize(result, options.level);
  return result;
}

void write_function_table(std::ostream& out, const FunctionEstimate& estimate,
                          const std::string& abscissa_name) {
  out << abscissa_name << ",value,lower,upper,theoretical\n";
  for (std::size_t k = 0; k < estimate.abscissa.size(); ++k) {
    out << format_number(estimate.abscissa[k]) << ',' << format_number(estimate.values[k]) << ',';
    if (estimate.envelope) {
      out << format_number(estimate.envelope->lower[k]) << ','
          << format_number(estimate.envelope->upper[k]);
    } else {
      out << ',';
    }
    out << ',';
    if (estimate.theoretical) out << format_number((*estimate.theoretical)[k]);
    out << '\n';
  }
}

}  // namespace stpp
