#include "validation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "stpp/intensity.hpp"
#include "stpp/oracle.hpp"
#include "stpp/parallel.hpp"
#include "stpp/secondorder.hpp"
#include "stpp/spacetime.hpp"
#include "stpp/synth.hpp"

namespace stpp::validation {
namespace {

const Window kUnit = Window::rectangle(0, 0, 1, 1);
const TimeWindow kUnitTime(0, 1);

// Distinct stream ids keep the checks statistically independent.
enum StreamId : std::uint64_t {
  kCsr = 1,
  kSt,
  kOrigin,
  kOracle,
  kNull,
  kPower,
  kDiscrimination,
  kPValue,
  kRl,
  kCsrEnvelope,
  kThomas,
  kKTime,
  kStMean,
  kResidual,
  kGaussian,
  kHistogram,
  kIntensity,
  kThinning,
  kRelabel,
  kPermute,
  kDeterminism,
};

template <typename Body>
Check timed(std::string id, std::string description, std::string requirement, Body&& body) {
  Check c{std::move(id), std::move(description), false, {}, std::move(requirement), 0.0};
  const auto start = std::chrono::steady_clock::now();
  body(c);
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return c;
}

std::vector<double> values_of(const DistanceGrid& g) { return {g.values().begin(), g.values().end()}; }
std::vector<double> values_of(const LagGrid& g) { return {g.values().begin(), g.values().end()}; }

double relative_difference(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

double max_relative_difference(const std::vector<double>& a, const std::vector<double>& b) {
  double worst = a.size() == b.size() ? 0.0 : std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
    worst = std::max(worst, relative_difference(a[i], b[i]));
  }
  return worst;
}

std::string percent(double fraction) { return fmt::format("{:.1f}%", 100.0 * fraction); }

STPattern null_st(std::size_t n, RandomStream& rng) {
  return generate_st(StIndependent{CsrBinomial{n}, UniformTimes{}}, kUnit, kUnitTime, rng);
}

// Exactly n points around a few Gaussian parents, offspring kept inside.
PointPattern tight_cluster(std::size_t n, std::size_t parents, double sigma, RandomStream& rng) {
  std::vector<Point> centres;
  for (std::size_t k = 0; k < parents; ++k) centres.push_back(uniform_point(kUnit, rng));
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const Point c = centres[i % parents];
    for (;;) {
      const Point p{rng.normal(c.x, sigma), rng.normal(c.y, sigma)};
      if (kUnit.contains(p)) {
        pts.push_back(p);
        break;
      }
    }
  }
  return PointPattern(kUnit, std::move(pts));
}

MarkedPattern combine(const PointPattern& cases, const PointPattern& controls) {
  std::vector<Point> pts(cases.points().begin(), cases.points().end());
  pts.insert(pts.end(), controls.points().begin(), controls.points().end());
  std::vector<Mark> marks(cases.size(), Mark::Case);
  marks.resize(pts.size(), Mark::Control);
  return MarkedPattern(PointPattern(cases.window(), std::move(pts)), std::move(marks));
}

// Random star-shaped (hence simple) polygon around (1, 1).
Window random_polygon(RandomStream& rng) {
  const std::size_t k = 5 + rng.below(6);
  std::vector<double> angles;
  for (std::size_t i = 0; i < k; ++i) angles.push_back(rng.uniform(0, 2 * std::numbers::pi));
  std::sort(angles.begin(), angles.end());
  std::vector<Point> v;
  for (double a : angles) {
    const double r = rng.uniform(0.5, 1.0);
    v.push_back({1 + r * std::cos(a), 1 + r * std::sin(a)});
  }
  return Window::polygon(std::move(v));
}

STPattern planted_interaction(std::size_t background, RandomStream& rng) {
  return generate_st(StInteracting{5, 10, 0.03, 0.02, background}, kUnit, kUnitTime, rng);
}

DistanceGrid default_s() { return default_distance_grid(kUnit); }
LagGrid default_t() { return LagGrid::uniform(0.5, 10); }

}  // namespace

Scale Scale::quick() {
  Scale s;
  s.csr_replicates = 100;
  s.st_replicates = 40;
  s.oracle_instances = 10;
  s.null_trials = 100;
  s.null_m = 99;
  s.power_trials = 20;
  s.power_m = 199;
  s.variance_permutations = 39;
  s.discrimination_trials = 20;
  s.calibration_trials = 60;
  s.residual_replicates = 40;
  return s;
}

Check csr_unbiasedness(const Scale& scale, const Options& options) {
  return timed(
      "csr-unbiasedness",
      fmt::format("mean K(s) over {} CSR patterns (n = {}) vs pi s^2, s in [0.02, 0.1]",
                  scale.csr_replicates, scale.csr_n),
      "max relative deviation <= 5%", [&](Check& c) {
        const DistanceGrid g = DistanceGrid({0.02, 0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.09, 0.10});
        std::vector<std::vector<double>> per(scale.csr_replicates);
        const RandomStream root(options.seed, kCsr);
        parallel_for(per.size(), options.threads, [&](std::size_t r) {
          RandomStream rng = root.substream(r);
          per[r] = k_hat(generate_points(CsrBinomial{scale.csr_n}, kUnit, rng), g).values;
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
          double mean = 0.0;
          for (const auto& v : per) mean += v[i];
          mean /= static_cast<double>(per.size());
          worst = std::max(worst, std::abs(mean / (std::numbers::pi * g[i] * g[i]) - 1.0));
        }
        c.observed = fmt::format("max relative deviation {}", percent(worst));
        c.passed = worst <= 0.05;
      });
}

Check st_benchmark(const Scale& scale, const Options& options) {
  return timed(
      "st-benchmark",
      fmt::format("mean K(s,t) over {} independent space-time patterns (n = {}) vs 2 pi s^2 t",
                  scale.st_replicates, scale.st_n),
      "max relative deviation <= 7% for s in [0.02, 0.1], t in [0.05, 0.25] T", [&](Check& c) {
        const DistanceGrid s({0.02, 0.04, 0.06, 0.08, 0.10});
        const LagGrid t({0.05, 0.10, 0.15, 0.20, 0.25});
        std::vector<std::vector<double>> per(scale.st_replicates);
        const RandomStream root(options.seed, kSt);
        parallel_for(per.size(), options.threads, [&](std::size_t r) {
          RandomStream rng = root.substream(r);
          per[r] = k_hat_st(null_st(scale.st_n, rng), s, t).values();
        });
        double worst = 0.0;
        for (std::size_t i = 0; i < s.size(); ++i) {
          for (std::size_t j = 0; j < t.size(); ++j) {
            double mean = 0.0;
            for (const auto& v : per) mean += v[i * t.size() + j];
            mean /= static_cast<double>(per.size());
            worst = std::max(worst, std::abs(mean / (2 * std::numbers::pi * s[i] * s[i] * t[j]) - 1.0));
          }
        }
        c.observed = fmt::format("max relative deviation {}", percent(worst));
        c.passed = worst <= 0.07;
      });
}

Check origin_identity(const Options& options) {
  return timed("origin-identity", "D(s,t) at the origin cell and on the two-point example",
               "exactly 0", [&](Check& c) {
                 const STPattern two(PointPattern(kUnit, {{0.35, 0.5}, {0.65, 0.5}}), {4.0, 6.0},
                                     TimeWindow(0, 10));
                 const DistanceGrid s1({0.5});
                 const LagGrid t1({3.0});
                 const double two_point =
                     d_hat_st(k_hat_st(two, s1, t1), k_hat_space(two, s1), k_hat_time(two, t1)).d.at(0, 0);

                 RandomStream rng(options.seed, kOrigin);
                 const STPattern p = null_st(200, rng);
                 std::vector<double> sv, tv;
                 for (int k = 24; k >= 0; --k) {
                   sv.push_back(0.1 * std::ldexp(1.0, -k));
                   tv.push_back(0.25 * std::ldexp(1.0, -k));
                 }
                 const DistanceGrid s(sv);
                 const LagGrid t(tv);
                 const auto d = d_hat_st(k_hat_st(p, s, t), k_hat_space(p, s), k_hat_time(p, t)).d;
                 const double origin = d.at(0, 0);
                 // |D| along the diagonal shrinks towards the origin.
                 double largest_small = 0.0;
                 for (std::size_t k = 0; k + 5 < s.size(); ++k) largest_small = std::max(largest_small, std::abs(d.at(k, k)));
                 c.observed = fmt::format("two-point D = {}, D(s_min, t_min) = {}, max |D| on the 20 smallest diagonal cells = {:.3g} (|D| at s = 0.1, t = 0.25: {:.3g})",
                                          two_point, origin, largest_small, std::abs(d.at(s.size() - 1, t.size() - 1)));
                 c.passed = two_point == 0.0 && origin == 0.0;
               });
}

Check oracle_equivalence(const Scale& scale, const Options& options) {
  return timed(
      "oracle-equivalence",
      fmt::format("indexed K(s), K(s,t), K2(t) vs brute-force loops on {} random instances, n <= {}",
                  scale.oracle_instances, scale.oracle_max_n),
      "relative difference < 1e-12", [&](Check& c) {
        std::vector<double> worst(scale.oracle_instances, 0.0);
        const RandomStream root(options.seed, kOracle);
        parallel_for(worst.size(), options.threads, [&](std::size_t r) {
          RandomStream rng = root.substream(r);
          const Window w = r % 2 == 0 ? Window::rectangle(0, 0, rng.uniform(0.5, 3), rng.uniform(0.5, 3))
                                      : random_polygon(rng);
          const std::size_t n = 2 + rng.below(scale.oracle_max_n - 1);
          const TimeWindow tw(0, rng.uniform(1, 100));
          const STPattern p = generate_st(StIndependent{CsrBinomial{n}, UniformTimes{}}, w, tw, rng);
          const DistanceGrid s = DistanceGrid::uniform(0.25 * w.diameter(), 8);
          const LagGrid t = LagGrid::uniform(0.5 * tw.length(), 6);
          const auto sv = values_of(s);
          const auto tv = values_of(t);
          double m = 0.0;
          m = std::max(m, max_relative_difference(k_hat(p.base(), s).values,
                                                  oracle::naive_k(p.points(), w, sv)));
          m = std::max(m, max_relative_difference(k_hat(p.base(), s, KNormalization::PointCount).values,
                                                  oracle::naive_k(p.points(), w, sv, true)));
          m = std::max(m, max_relative_difference(
                              k_hat_st(p, s, t).values(),
                              oracle::naive_k_st(p.points(), p.times(), w, tw.start(), tw.end(), sv, tv)));
          m = std::max(m, max_relative_difference(k_hat_time(p, t).values,
                                                  oracle::naive_k_time(p.times(), tw.start(), tw.end(), tv)));
          worst[r] = m;
        });
        const double m = worst.empty() ? 0.0 : *std::max_element(worst.begin(), worst.end());
        c.observed = fmt::format("max relative difference {:.3g}", m);
        c.passed = m < 1e-12;
      });
}

namespace {

// Fraction of trials whose test p-value is <= alpha.
template <typename Make>
double rejection_rate(std::size_t trials, std::uint64_t seed, StreamId id, unsigned threads,
                      const MCTestOptions& base, double alpha, Make make) {
  std::vector<int> rejected(trials, 0);
  const RandomStream root(seed, id);
  parallel_for(trials, threads, [&](std::size_t r) {
    RandomStream rng = root.substream(r);
    const STPattern p = make(rng);
    MCTestOptions opt = base;
    opt.seed = rng.next_u64();
    opt.threads = 1;
    rejected[r] = mc_interaction_test(p, default_s(), default_t(), opt).p_value <= alpha ? 1 : 0;
  });
  double count = 0;
  for (int v : rejected) count += v;
  return count / static_cast<double>(trials);
}

}  // namespace

Check mc_null_calibration(const Scale& scale, const Options& options) {
  return timed(
      "mc-null-calibration",
      fmt::format("Monte Carlo interaction test on independent space-time data, n = {}, m = {}, {} trials",
                  scale.null_n, scale.null_m + 1, scale.null_trials),
      "rejection rate at alpha = 0.05 within [3%, 7%]", [&](Check& c) {
        MCTestOptions opt;
        opt.replicates = scale.null_m + 1;
        opt.variance_permutations = scale.variance_permutations;
        const double rate = rejection_rate(scale.null_trials, options.seed, kNull, options.threads, opt, 0.05,
                                           [&](RandomStream& rng) { return null_st(scale.null_n, rng); });
        c.observed = fmt::format("rejection rate {}", percent(rate));
        c.passed = rate >= 0.03 && rate <= 0.07;
      });
}

Check mc_power(const Scale& scale, const Options& options) {
  return timed(
      "mc-power",
      fmt::format("Monte Carlo interaction test on planted space-time clusters, m = {}, {} trials",
                  scale.power_m + 1, scale.power_trials),
      "p <= 0.01 in >= 90% of trials", [&](Check& c) {
        MCTestOptions opt;
        opt.replicates = scale.power_m + 1;
        opt.variance_permutations = scale.variance_permutations;
        const double rate = rejection_rate(scale.power_trials, options.seed, kPower, options.threads, opt, 0.01,
                                           [&](RandomStream& rng) { return planted_interaction(50, rng); });
        c.observed = fmt::format("p <= 0.01 in {}", percent(rate));
        c.passed = rate >= 0.90;
      });
}

Check d_discrimination(const Scale& scale, const Options& options) {
  return timed(
      "d-discrimination",
      fmt::format("D(s) for tight-cluster cases vs CSR controls (n = {} each), 95% random-labeling "
                  "envelope, {} trials; duplicated multisets",
                  scale.discrimination_n, scale.discrimination_trials),
      "D above the envelope at >= 80% of grid points in >= 95% of trials; D == 0 for identical classes",
      [&](Check& c) {
        const DistanceGrid g = DistanceGrid::uniform(0.1, 10);
        std::vector<int> good(scale.discrimination_trials, 0);
        const RandomStream root(options.seed, kDiscrimination);
        parallel_for(good.size(), options.threads, [&](std::size_t r) {
          RandomStream rng = root.substream(r);
          const PointPattern cases = tight_cluster(scale.discrimination_n, 5, 0.03, rng);
          const PointPattern controls = generate_points(CsrBinomial{scale.discrimination_n}, kUnit, rng);
          EnvelopeOptions opt;
          opt.replicates = 39;
          opt.level = 0.95;
          opt.seed = rng.next_u64();
          const auto env = rl_envelope(combine(cases, controls), g, LabelStatistic::DHat, opt);
          std::size_t above = 0;
          for (std::size_t i = 0; i < g.size(); ++i) above += env.observed.values[i] > env.rank_band.upper[i];
          good[r] = static_cast<double>(above) >= 0.8 * static_cast<double>(g.size()) ? 1 : 0;
        });
        double share = 0;
        for (int v : good) share += v;
        share /= static_cast<double>(good.size());

        RandomStream rng(options.seed, kDiscrimination + 1000);
        const PointPattern base = generate_points(CsrBinomial{scale.discrimination_n}, kUnit, rng);
        const auto d0 = d_hat(combine(base, base), g);
        const bool zero = std::all_of(d0.values.begin(), d0.values.end(), [](double v) { return v == 0.0; });
        c.observed = fmt::format("{} of trials above the envelope at >= 80% of grid points; identical classes: {}",
                                 percent(share), zero ? "D == 0 everywhere" : "D != 0");
        c.passed = share >= 0.95 && zero;
      });
}

Check edge_weights() {
  return timed("edge-weights", "isotropic weight at a corner, mid-edge and interior circle (r = 0.1)",
               "4 / 2 / 1 within 1e-6, matching the arc-sampling oracle", [&](Check& c) {
                 const std::vector<std::pair<Point, double>> cases = {
                     {{0, 0}, 4.0}, {{0.5, 0}, 2.0}, {{0.5, 0.5}, 1.0}};
                 double worst = 0.0;
                 std::string obs;
                 for (const auto& [p, expected] : cases) {
                   const double w = spatial_edge_weight(p, 0.1, kUnit).weight;
                   const double o = 1.0 / oracle::arc_sampling_proportion(p, 0.1, kUnit);
                   worst = std::max({worst, std::abs(w - expected), std::abs(o - expected)});
                   obs += fmt::format("{}{} (oracle {})", obs.empty() ? "" : " / ", format_number(w),
                                      format_number(o));
                 }
                 c.observed = fmt::format("{}; max error {:.3g}", obs, worst);
                 c.passed = worst <= 1e-6;
               });
}

Check p_value_mechanics(const Options& options) {
  return timed("p-value-mechanics", "observed U ranked 1st of m = 1000", "p = 0.001 exactly", [&](Check& c) {
    std::vector<double> reps(999);
    for (std::size_t i = 0; i < reps.size(); ++i) reps[i] = static_cast<double>(i) / 999.0;
    const auto ranked = rank_test(2.0, reps, Tail::Upper);

    RandomStream rng(options.seed, kPValue);
    const STPattern p = generate_st(StInteracting{10, 10, 0.02, 0.01, 20}, kUnit, kUnitTime, rng);
    MCTestOptions opt;
    opt.replicates = 1000;
    opt.variance_permutations = 99;
    opt.seed = rng.next_u64();
    opt.threads = options.threads;
    const auto test = mc_interaction_test(p, default_s(), default_t(), opt);
    c.observed = fmt::format("rank_test: {}; planted clusters: rank {} of {}, {}", mc_report_line(ranked),
                             test.rank, test.m, mc_report_line(test));
    c.passed = ranked.p_value == 0.001 && mc_report_line(ranked) == "p = 0.001, positive interaction" &&
               (test.rank != 1 || mc_report_line(test) == "p = 0.001, positive interaction") && test.rank == 1;
  });
}

Check rl_envelope_calibration(const Scale& scale, const Options& options) {
  return timed("rl-envelope-calibration",
               fmt::format("observed D under true random labeling inside the 95% envelope (m = 39), {} trials",
                           scale.calibration_trials),
               "mean pointwise coverage in [92%, 98%]", [&](Check& c) {
                 const DistanceGrid g = DistanceGrid::uniform(0.2, 5);
                 std::vector<double> coverage(scale.calibration_trials, 0.0);
                 const RandomStream root(options.seed, kRl);
                 parallel_for(coverage.size(), options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const MarkedPattern m = generate_marked({CsrBinomial{30}, CsrBinomial{30}}, kUnit, rng);
                   EnvelopeOptions opt;
                   opt.seed = rng.next_u64();
                   const auto env = rl_envelope(m, g, LabelStatistic::DHat, opt);
                   double inside = 0;
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     const double v = env.observed.values[i];
                     inside += v >= env.rank_band.lower[i] && v <= env.rank_band.upper[i];
                   }
                   coverage[r] = inside / static_cast<double>(g.size());
                 });
                 double mean = 0;
                 for (double v : coverage) mean += v / static_cast<double>(coverage.size());
                 c.observed = fmt::format("mean coverage {}", percent(mean));
                 c.passed = mean >= 0.92 && mean <= 0.98;
               });
}

Check csr_envelope_calibration(const Scale& scale, const Options& options) {
  return timed("csr-envelope-calibration",
               fmt::format("L(s) - s of CSR input inside the 99% CSR envelope (m = 199), {} trials",
                           scale.calibration_trials),
               "mean pointwise coverage >= 97%", [&](Check& c) {
                 const DistanceGrid g = DistanceGrid::uniform(0.2, 5);
                 std::vector<double> coverage(scale.calibration_trials, 0.0);
                 const RandomStream root(options.seed, kCsrEnvelope);
                 parallel_for(coverage.size(), options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const PointPattern p = generate_points(CsrBinomial{100}, kUnit, rng);
                   EnvelopeOptions opt;
                   opt.replicates = 199;
                   opt.level = 0.99;
                   opt.seed = rng.next_u64();
                   const auto env = csr_envelope(p, g, CsrStatistic::LMinusS, opt);
                   double inside = 0;
                   for (std::size_t i = 0; i < g.size(); ++i) {
                     const double v = env.observed.values[i];
                     inside += v >= env.rank_band.lower[i] && v <= env.rank_band.upper[i];
                   }
                   coverage[r] = inside / static_cast<double>(g.size());
                 });
                 double mean = 0;
                 for (double v : coverage) mean += v / static_cast<double>(coverage.size());
                 c.observed = fmt::format("mean coverage {}", percent(mean));
                 c.passed = mean >= 0.97;
               });
}

Check thomas_exceeds_csr_band(const Scale& scale, const Options& options) {
  const std::size_t trials = std::max<std::size_t>(10, scale.calibration_trials / 4);
  return timed("thomas-above-csr-band",
               fmt::format("Thomas process L(s) - s vs 99% CSR envelope at s = 0.02, {} trials", trials),
               "above the upper band in >= 95% of trials", [&](Check& c) {
                 const DistanceGrid g({0.02, 0.04});
                 std::vector<int> above(trials, 0);
                 const RandomStream root(options.seed, kThomas);
                 parallel_for(trials, options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const PointPattern p = generate_points(ThomasCluster{25, 0.02, 8}, kUnit, rng);
                   EnvelopeOptions opt;
                   opt.replicates = 99;
                   opt.level = 0.99;
                   opt.seed = rng.next_u64();
                   const auto env = csr_envelope(p, g, CsrStatistic::LMinusS, opt);
                   above[r] = env.observed.values[0] > env.rank_band.upper[0];
                 });
                 double share = 0;
                 for (int v : above) share += v;
                 share /= static_cast<double>(trials);
                 c.observed = fmt::format("above in {}", percent(share));
                 c.passed = share >= 0.95;
               });
}

Check k_time_calibration(const Scale& scale, const Options& options) {
  return timed("k-time-calibration",
               fmt::format("K2(t) of uniform times (n = 200) inside the 95% uniform-time envelope (m = 39), "
                           "{} trials",
                           scale.calibration_trials),
               "mean pointwise coverage in [92%, 98%]", [&](Check& c) {
                 const LagGrid t = LagGrid::uniform(0.4, 5);
                 std::vector<double> coverage(scale.calibration_trials, 0.0);
                 const RandomStream root(options.seed, kKTime);
                 parallel_for(coverage.size(), options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const STPattern p = null_st(200, rng);
                   EnvelopeOptions opt;
                   opt.seed = rng.next_u64();
                   const auto env = k_time_envelope(p, t, opt);
                   double inside = 0;
                   for (std::size_t i = 0; i < t.size(); ++i) {
                     const double v = env.observed.values[i];
                     inside += v >= env.rank_band.lower[i] && v <= env.rank_band.upper[i];
                   }
                   coverage[r] = inside / static_cast<double>(t.size());
                 });
                 double mean = 0;
                 for (double v : coverage) mean += v / static_cast<double>(coverage.size());
                 c.observed = fmt::format("mean coverage {}", percent(mean));
                 c.passed = mean >= 0.92 && mean <= 0.98;
               });
}

Check st_difference_null_mean(const Scale& scale, const Options& options) {
  return timed("d-st-null-mean",
               fmt::format("mean D(s,t) over {} independent patterns (n = 200)", scale.st_replicates),
               "|mean D| < 0.1 mean K0 on every cell of s in [0.04, 0.1], t in [0.1, 0.25]", [&](Check& c) {
                 const DistanceGrid s({0.04, 0.06, 0.08, 0.10});
                 const LagGrid t({0.10, 0.15, 0.20, 0.25});
                 std::vector<std::vector<double>> d(scale.st_replicates), k0(scale.st_replicates);
                 const RandomStream root(options.seed, kStMean);
                 parallel_for(d.size(), options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const STPattern p = null_st(200, rng);
                   const auto diff = d_hat_st(k_hat_st(p, s, t), k_hat_space(p, s), k_hat_time(p, t));
                   d[r] = diff.d.values();
                   k0[r] = diff.k0.values();
                 });
                 double worst = 0;
                 for (std::size_t cell = 0; cell < s.size() * t.size(); ++cell) {
                   double md = 0, mk = 0;
                   for (std::size_t r = 0; r < d.size(); ++r) {
                     md += d[r][cell];
                     mk += k0[r][cell];
                   }
                   worst = std::max(worst, std::abs(md) / mk);
                 }
                 c.observed = fmt::format("max |mean D| / mean K0 = {:.4f}", worst);
                 c.passed = worst < 0.1;
               });
}

Check residual_null_moments(const Scale& scale, const Options& options) {
  return timed(
      "residual-null-moments",
      fmt::format("standardized residuals R(s,t) over {} independent patterns (n = {}), V from {} time "
                  "permutations each",
                  scale.residual_replicates, scale.residual_n, scale.variance_permutations),
      "grand mean within +-0.15, mean per-cell variance in [0.7, 1.3]", [&](Check& c) {
        const DistanceGrid s = default_s();
        const LagGrid t = default_t();
        std::vector<std::vector<double>> r_values(scale.residual_replicates);
        const RandomStream root(options.seed, kResidual);
        parallel_for(r_values.size(), options.threads, [&](std::size_t r) {
          RandomStream rng = root.substream(r);
          const STPattern p = null_st(scale.residual_n, rng);
          const auto diff = d_hat_st(k_hat_st(p, s, t), k_hat_space(p, s), k_hat_time(p, t));
          const auto v = variance_grid(p, s, t, scale.variance_permutations, rng.next_u64());
          r_values[r] = residual_grid(diff.d, v.variance, default_variance_floor(diff.k0)).r.values();
        });
        const std::size_t cells = s.size() * t.size();
        double grand = 0, grand_n = 0, var_sum = 0, worst_mean = 0;
        std::size_t var_cells = 0;
        for (std::size_t cell = 0; cell < cells; ++cell) {
          double sum = 0, sq = 0, n = 0;
          for (const auto& rv : r_values) {
            if (std::isnan(rv[cell])) continue;
            sum += rv[cell];
            sq += rv[cell] * rv[cell];
            n += 1;
          }
          if (n < 2) continue;
          const double mean = sum / n;
          worst_mean = std::max(worst_mean, std::abs(mean));
          var_sum += (sq - n * mean * mean) / (n - 1);
          ++var_cells;
          grand += sum;
          grand_n += n;
        }
        const double gm = grand / grand_n;
        const double mv = var_sum / static_cast<double>(var_cells);
        c.observed = fmt::format("grand mean {:.4f}, mean per-cell variance {:.4f}, worst cell mean {:.4f}", gm,
                                 mv, worst_mean);
        c.passed = std::abs(gm) <= 0.15 && mv >= 0.7 && mv <= 1.3;
      });
}

Check gaussian_null_calibration(const Scale& scale, const Options& options) {
  return timed("gaussian-null-calibration",
               fmt::format("|z| > 1.96 under independent space-time data (n = {}), {} trials", scale.null_n,
                           scale.null_trials),
               "rate within [2.5%, 8%]", [&](Check& c) {
                 std::vector<int> hit(scale.null_trials, 0);
                 const RandomStream root(options.seed, kGaussian);
                 parallel_for(hit.size(), options.threads, [&](std::size_t r) {
                   RandomStream rng = root.substream(r);
                   const STPattern p = null_st(scale.null_n, rng);
                   MCTestOptions opt;
                   opt.replicates = 100;
                   opt.variance_permutations = scale.variance_permutations;
                   opt.seed = rng.next_u64();
                   hit[r] = std::abs(gaussian_interaction_test(p, default_s(), default_t(), opt).z) > 1.96;
                 });
                 double rate = 0;
                 for (int v : hit) rate += v;
                 rate /= static_cast<double>(hit.size());
                 c.observed = fmt::format("rate {}", percent(rate));
                 c.passed = rate >= 0.025 && rate <= 0.08;
               });
}

Check histogram_multinomial(const Options& options) {
  return timed("histogram-multinomial", "1200 uniform times over a year in 12 month bins",
               "every count within 3 sigma of 100", [&](Check& c) {
                 RandomStream rng(options.seed, kHistogram);
                 const double year = 365.2425;
                 const TimeWindow tw(0, year, TimeResolution::Day);
                 std::vector<double> times;
                 for (int i = 0; i < 1200; ++i) times.push_back(rng.uniform(0, year));
                 const STPattern p(generate_points(CsrBinomial{1200}, kUnit, rng), times, tw);
                 const auto h = temporal_histogram(p, TimeBin::Month);
                 const double sigma = std::sqrt(1200.0 / 12 * 11 / 12);
                 double worst = 0;
                 for (const auto& b : h.bins) worst = std::max(worst, std::abs(static_cast<double>(b.count) - 100) / sigma);
                 c.observed = fmt::format("{} bins, largest deviation {:.2f} sigma", h.bins.size(), worst);
                 c.passed = h.bins.size() == 12 && worst <= 3.0;
               });
}

Check intensity_mass(const Options& options) {
  return timed("intensity-mass", "area-normalized kernel surface integrated over the window",
               "integral = n within 1e-3 relative", [&](Check& c) {
                 RandomStream rng(options.seed, kIntensity);
                 const double h = 0.05;
                 const double margin = std::numbers::sqrt2 * h;
                 std::vector<Point> pts;
                 for (int i = 0; i < 150; ++i) {
                   pts.push_back({rng.uniform(margin, 1 - margin), rng.uniform(margin, 1 - margin)});
                 }
                 const auto s = intensity_estimate(PointPattern(kUnit, pts), h, {256, 256});
                 const double rel = std::abs(integrate(s.raster) - 150.0) / 150.0;
                 c.observed = fmt::format("relative error {:.2e}", rel);
                 c.passed = rel <= 1e-3;
               });
}

Check thinning_equivalence(const Options& options) {
  return timed("thinning-equivalence", "constant-rate thinning vs Poisson counts, 500 draws each",
               "two-sample KS not rejected at alpha = 0.01", [&](Check& c) {
                 RandomStream rng(options.seed, kThinning);
                 const double rate = 80;
                 std::vector<double> a, b;
                 for (int i = 0; i < 500; ++i) {
                   a.push_back(static_cast<double>(
                       generate_points(InhomogeneousThinning{rate, [rate](Point) { return rate; }}, kUnit, rng).size()));
                   b.push_back(static_cast<double>(generate_points(PoissonCount{rate}, kUnit, rng).size()));
                 }
                 const double d = oracle::ks_statistic(a, b);
                 const double crit = oracle::ks_critical_value(0.01, 500, 500);
                 c.observed = fmt::format("D = {:.4f}, critical {:.4f}", d, crit);
                 c.passed = d < crit;
               });
}

Check relabel_uniformity(const Options& options) {
  return timed("relabel-uniformity", "10^4 relabelings of 5 points with 2 cases",
               "each of the 10 assignments at frequency 0.1 +- 0.02", [&](Check& c) {
                 RandomStream rng(options.seed, kRelabel);
                 const PointPattern five = generate_points(CsrBinomial{5}, kUnit, rng);
                 const MarkedPattern base(five, {Mark::Case, Mark::Case, Mark::Control, Mark::Control, Mark::Control});
                 std::map<unsigned, int> freq;
                 for (int i = 0; i < 10000; ++i) {
                   const auto r = random_relabel(base, rng);
                   unsigned key = 0;
                   for (std::size_t k = 0; k < 5; ++k) key |= (r.marks()[k] == Mark::Case ? 1u : 0u) << k;
                   ++freq[key];
                 }
                 double worst = 0;
                 for (const auto& [key, count] : freq) worst = std::max(worst, std::abs(count / 1e4 - 0.1));
                 c.observed = fmt::format("{} assignments seen, max deviation {:.4f}", freq.size(), worst);
                 c.passed = freq.size() == 10 && worst <= 0.02;
               });
}

Check permutation_uniformity(const Options& options) {
  return timed("permutation-uniformity", "6000 time permutations of 3 events",
               "each of the 6 orders at frequency 1/6 +- 0.02", [&](Check& c) {
                 RandomStream rng(options.seed, kPermute);
                 const STPattern p(generate_points(CsrBinomial{3}, kUnit, rng), {0.1, 0.2, 0.3}, kUnitTime);
                 std::map<std::vector<double>, int> freq;
                 for (int i = 0; i < 6000; ++i) {
                   const auto q = permute_times(p, rng);
                   ++freq[std::vector<double>(q.times().begin(), q.times().end())];
                 }
                 double worst = 0;
                 for (const auto& [key, count] : freq) worst = std::max(worst, std::abs(count / 6000.0 - 1.0 / 6));
                 c.observed = fmt::format("{} orders seen, max deviation {:.4f}", freq.size(), worst);
                 c.passed = freq.size() == 6 && worst <= 0.02;
               });
}

Check generator_determinism(const Options& options) {
  return timed("generator-determinism", "every generator run twice with the same seed",
               "bit-identical patterns", [&](Check& c) {
                 const TimeWindow tw(0, 10);
                 const std::vector<GeneratorKind> kinds = {
                     CsrBinomial{40},
                     PoissonCount{40},
                     InhomogeneousThinning{50, [](Point p) { return 50 * p.x; }},
                     ThomasCluster{10, 0.03, 4},
                     LabeledSuperposition{CsrBinomial{20}, ThomasCluster{5, 0.05, 4}},
                     StIndependent{CsrBinomial{30}, ClusteredTimes{2, 0.5}},
                     StInteracting{4, 6, 0.04, 0.3, 10},
                 };
                 auto flatten = [](const GeneratedPattern& g) {
                   std::vector<double> out;
                   std::visit(
                       [&](const auto& p) {
                         for (const Point& q : p.points()) {
                           out.push_back(q.x);
                           out.push_back(q.y);
                         }
                         using T = std::decay_t<decltype(p)>;
                         if constexpr (std::is_same_v<T, STPattern>) {
                           out.insert(out.end(), p.times().begin(), p.times().end());
                         } else if constexpr (std::is_same_v<T, MarkedPattern>) {
                           for (Mark m : p.marks()) out.push_back(m == Mark::Case ? 1 : 0);
                         }
                       },
                       g);
                   return out;
                 };
                 std::size_t same = 0;
                 for (std::size_t k = 0; k < kinds.size(); ++k) {
                   const GeneratorSpec spec{kinds[k], options.seed + kDeterminism * 1000 + k};
                   same += flatten(generate(spec, kUnit, tw)) == flatten(generate(spec, kUnit, tw));
                 }
                 c.observed = fmt::format("{} of {} generators reproduced", same, kinds.size());
                 c.passed = same == kinds.size();
               });
}

std::vector<Check> run_all(const Scale& scale, const Options& options,
                           const std::function<void(const Check&)>& progress) {
  std::vector<std::function<Check()>> checks = {
      [&] { return csr_unbiasedness(scale, options); },
      [&] { return st_benchmark(scale, options); },
      [&] { return origin_identity(options); },
      [&] { return oracle_equivalence(scale, options); },
      [&] { return mc_null_calibration(scale, options); },
      [&] { return mc_power(scale, options); },
      [&] { return d_discrimination(scale, options); },
      [&] { return edge_weights(); },
      [&] { return p_value_mechanics(options); },
      [&] { return rl_envelope_calibration(scale, options); },
      [&] { return csr_envelope_calibration(scale, options); },
      [&] { return thomas_exceeds_csr_band(scale, options); },
      [&] { return k_time_calibration(scale, options); },
      [&] { return st_difference_null_mean(scale, options); },
      [&] { return residual_null_moments(scale, options); },
      [&] { return gaussian_null_calibration(scale, options); },
      [&] { return histogram_multinomial(options); },
      [&] { return intensity_mass(options); },
      [&] { return thinning_equivalence(options); },
      [&] { return relabel_uniformity(options); },
      [&] { return permutation_uniformity(options); },
      [&] { return generator_determinism(options); },
  };
  std::vector<Check> out;
  for (const auto& run : checks) {
    out.push_back(run());
    if (progress) progress(out.back());
  }
  return out;
}

}  // namespace stpp::validation
