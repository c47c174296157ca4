#include "stpp/synth.hpp"

#include <cmath>
#include <vector>

#include <fmt/format.h>

#include "stpp/errors.hpp"

namespace stpp {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* what) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(fmt::format("generator parameter {} must be positive, got {}", what, value));
  }
}

// Upper bound on rejection attempts for a single uniform draw; a window that
// fills less than ~1e-6 of its bounding box is not a sensible study region.
constexpr int kMaxRejections = 1 << 20;

void validate(const SpatialLaw& law) {
  std::visit(Overloaded{
                 [](const CsrBinomial& c) {
                   if (c.n == 0) throw ConfigError("csr-binomial needs n > 0");
                 },
                 [](const PoissonCount& p) { require_positive(p.rate, "rate"); },
                 [](const InhomogeneousThinning& t) {
                   require_positive(t.rate_max, "rate_max");
                   if (!t.rate) throw ConfigError("inhomogeneous thinning needs a rate function");
                 },
                 [](const ThomasCluster& t) {
                   require_positive(t.parent_rate, "parent_rate");
                   require_positive(t.sigma, "sigma");
                   require_positive(t.mean_offspring, "mean_offspring");
                 },
             },
             law);
}

std::vector<Point> uniform_points(std::size_t n, const Window& window, RandomStream& rng) {
  std::vector<Point> pts;
  pts.reserve(n);
  for (std::size_t i = 0; i < n; ++i) pts.push_back(uniform_point(window, rng));
  return pts;
}

double draw_time(const TemporalLaw& law, const std::vector<double>& centers,
                 const TimeWindow& tw, RandomStream& rng) {
  if (std::holds_alternative<UniformTimes>(law)) return rng.uniform(tw.start(), tw.end());
  const auto& clustered = std::get<ClusteredTimes>(law);
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const double c = centers[static_cast<std::size_t>(rng.below(centers.size()))];
    const double t = rng.normal(c, clustered.sigma);
    if (tw.contains(t)) return t;
  }
  throw ConfigError("clustered times: too many rejections, sigma too large for the window");
}

}  // namespace

const char* generator_kind_name(const GeneratorKind& kind) {
  return std::visit(Overloaded{
                        [](const CsrBinomial&) { return "csr-binomial"; },
                        [](const PoissonCount&) { return "poisson-count"; },
                        [](const InhomogeneousThinning&) { return "inhomogeneous-thinning"; },
                        [](const ThomasCluster&) { return "thomas-cluster"; },
                        [](const LabeledSuperposition&) { return "labeled-superposition"; },
                        [](const StIndependent&) { return "st-independent"; },
                        [](const StInteracting&) { return "st-interacting"; },
                    },
                    kind);
}

Point uniform_point(const Window& window, RandomStream& rng) {
  const BoundingBox& box = window.bounds();
  for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
    const Point p{rng.uniform(box.x_min, box.x_max), rng.uniform(box.y_min, box.y_max)};
    if (window.is_rectangle() || window.contains(p)) return p;
  }
  throw ConfigError("window too thin for rejection sampling");
}

PointPattern generate_points(const SpatialLaw& law, const Window& window, RandomStream& rng) {
  validate(law);
  std::vector<Point> pts = std::visit(
      Overloaded{
          [&](const CsrBinomial& c) { return uniform_points(c.n, window, rng); },
          [&](const PoissonCount& p) {
            return uniform_points(rng.poisson(p.rate * window.area()), window, rng);
          },
          [&](const InhomogeneousThinning& t) {
            auto candidates = uniform_points(rng.poisson(t.rate_max * window.area()), window, rng);
            std::vector<Point> kept;
            for (const Point& c : candidates) {
              const double rate = t.rate(c);
              if (rate > t.rate_max * (1.0 + 1e-12)) {
                throw ConfigError(fmt::format("thinning rate {} exceeds rate_max {}", rate,
                                              t.rate_max));
              }
              if (rng.uniform() * t.rate_max < rate) kept.push_back(c);
            }
            return kept;
          },
          [&](const ThomasCluster& t) {
            const auto parents = uniform_points(rng.poisson(t.parent_rate * window.area()),
                                                window, rng);
            std::vector<Point> offspring;
            for (const Point& parent : parents) {
              const auto count = rng.poisson(t.mean_offspring);
              for (std::uint64_t k = 0; k < count; ++k) {
                const Point p{rng.normal(parent.x, t.sigma), rng.normal(parent.y, t.sigma)};
                if (window.contains(p)) offspring.push_back(p);
              }
            }
            return offspring;
          },
      },
      law);
  return PointPattern(window, std::move(pts));
}

MarkedPattern generate_marked(const LabeledSuperposition& law, const Window& window,
                              RandomStream& rng) {
  RandomStream case_rng = rng.substream(0);
  RandomStream control_rng = rng.substream(1);
  const PointPattern cases = generate_points(law.cases, window, case_rng);
  const PointPattern controls = generate_points(law.controls, window, control_rng);
  std::vector<Point> pts(cases.points().begin(), cases.points().end());
  pts.insert(pts.end(), controls.points().begin(), controls.points().end());
  std::vector<Mark> marks(cases.size(), Mark::Case);
  marks.insert(marks.end(), controls.size(), Mark::Control);
  return MarkedPattern(PointPattern(window, std::move(pts)), std::move(marks));
}

STPattern generate_st(const StIndependent& law, const Window& window,
                      const TimeWindow& time_window, RandomStream& rng) {
  RandomStream space_rng = rng.substream(0);
  RandomStream time_rng = rng.substream(1);
  PointPattern base = generate_points(law.space, window, space_rng);

  std::vector<double> centers;
  if (const auto* clustered = std::get_if<ClusteredTimes>(&law.time)) {
    if (clustered->centers == 0) throw ConfigError("clustered times need at least one centre");
    require_positive(clustered->sigma, "time sigma");
    for (std::size_t c = 0; c < clustered->centers; ++c) {
      centers.push_back(time_rng.uniform(time_window.start(), time_window.end()));
    }
  }
  std::vector<double> times;
  times.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    times.push_back(draw_time(law.time, centers, time_window, time_rng));
  }
  return STPattern(std::move(base), std::move(times), time_window);
}

STPattern generate_st(const StInteracting& law, const Window& window,
                      const TimeWindow& time_window, RandomStream& rng) {
  require_positive(law.cluster_count, "cluster_count");
  require_positive(law.mean_offspring, "mean_offspring");
  require_positive(law.sigma, "sigma");
  require_positive(law.sigma_t, "sigma_t");

  std::vector<Point> pts;
  std::vector<double> times;
  const auto n_clusters = rng.poisson(law.cluster_count);
  for (std::uint64_t c = 0; c < n_clusters; ++c) {
    const Point centre = uniform_point(window, rng);
    const double epoch = rng.uniform(time_window.start(), time_window.end());
    const auto count = rng.poisson(law.mean_offspring);
    for (std::uint64_t k = 0; k < count; ++k) {
      const Point p{rng.normal(centre.x, law.sigma), rng.normal(centre.y, law.sigma)};
      const double t = rng.normal(epoch, law.sigma_t);
      if (!window.contains(p) || !time_window.contains(t)) continue;
      pts.push_back(p);
      times.push_back(t);
    }
  }
  for (std::size_t b = 0; b < law.background; ++b) {
    pts.push_back(uniform_point(window, rng));
    times.push_back(rng.uniform(time_window.start(), time_window.end()));
  }
  return STPattern(PointPattern(window, std::move(pts)), std::move(times), time_window);
}

GeneratedPattern generate(const GeneratorSpec& spec, const Window& window,
                          const std::optional<TimeWindow>& time_window) {
  RandomStream rng(spec.seed);
  auto need_time = [&]() -> const TimeWindow& {
    if (!time_window) {
      throw ConfigError(fmt::format("{} generator needs a time window",
                                    generator_kind_name(spec.kind)));
    }
    return *time_window;
  };
  return std::visit(
      Overloaded{
          [&](const LabeledSuperposition& l) -> GeneratedPattern {
            return generate_marked(l, window, rng);
          },
          [&](const StIndependent& s) -> GeneratedPattern {
            return generate_st(s, window, need_time(), rng);
          },
          [&](const StInteracting& s) -> GeneratedPattern {
            return generate_st(s, window, need_time(), rng);
          },
          [&](const auto& spatial) -> GeneratedPattern {
            return generate_points(SpatialLaw(spatial), window, rng);
          },
      },
      spec.kind);
}

MarkedPattern random_relabel(const MarkedPattern& pattern, RandomStream& rng) {
  std::vector<Mark> marks(pattern.marks().begin(), pattern.marks().end());
  rng.shuffle(std::span<Mark>(marks));
  return MarkedPattern(pattern.base(), std::move(marks));
}

MarkedPattern random_relabel(const MarkedPattern& pattern, std::uint64_t seed) {
  RandomStream rng(seed);
  return random_relabel(pattern, rng);
}

STPattern permute_times(const STPattern& pattern, RandomStream& rng) {
  std::vector<double> times(pattern.times().begin(), pattern.times().end());
  rng.shuffle(std::span<double>(times));
  return STPattern(pattern.base(), std::move(times), pattern.time_window());
}

STPattern permute_times(const STPattern& pattern, std::uint64_t seed) {
  RandomStream rng(seed);
  return permute_times(pattern, rng);
}

}  // namespace stpp
