#include "synthspec.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

#include "config.hpp"
#include "stpp/errors.hpp"

namespace stpp::app {

namespace {

struct Reader {
  const KeyValueFile& file;
  std::set<std::string> used;

  std::string key(const std::string& prefix, const std::string& name) {
    std::string k = prefix + name;
    used.insert(k);
    return k;
  }
  double positive(const std::string& prefix, const std::string& name) {
    const std::string k = key(prefix, name);
    const auto v = file.number(k);
    if (!v) throw ConfigError(fmt::format("{}: {} is required", file.origin(), k));
    if (!(*v > 0)) throw ConfigError(fmt::format("{}: {} must be positive", file.origin(), k));
    return *v;
  }
  std::size_t count(const std::string& prefix, const std::string& name) {
    const std::string k = key(prefix, name);
    const auto v = file.count(k);
    if (!v) throw ConfigError(fmt::format("{}: {} is required", file.origin(), k));
    return static_cast<std::size_t>(*v);
  }
};

SpatialLaw spatial_law(Reader& r, const std::string& prefix) {
  const std::string kind = r.file.required(r.key(prefix, "kind"));
  if (kind == "csr-binomial") return CsrBinomial{r.count(prefix, "n")};
  if (kind == "poisson-count") return PoissonCount{r.positive(prefix, "rate")};
  if (kind == "thomas-cluster") {
    return ThomasCluster{r.positive(prefix, "parent_rate"), r.positive(prefix, "sigma"),
                         r.positive(prefix, "mean_offspring")};
  }
  if (kind == "inhomogeneous-thinning") {
    // rate(x, y) = a + b x + c y, clipped below at 0
    const double rate_max = r.positive(prefix, "rate_max");
    const double a = r.file.number_or(r.key(prefix, "rate_intercept"), rate_max);
    const double b = r.file.number_or(r.key(prefix, "rate_x"), 0.0);
    const double c = r.file.number_or(r.key(prefix, "rate_y"), 0.0);
    return InhomogeneousThinning{rate_max, [a, b, c](Point p) { return std::max(0.0, a + b * p.x + c * p.y); }};
  }
  throw ConfigError(fmt::format("{}: {} '{}' is not a spatial generator", r.file.origin(), prefix + "kind", kind));
}

}  // namespace

SynthRequest parse_synth_spec(const KeyValueFile& file) {
  Reader r{file, {}};
  const std::string kind = file.required(r.key("", "kind"));
  const auto seed = file.count(r.key("", "seed"));
  if (!seed) throw ConfigError(fmt::format("{}: seed is required", file.origin()));
  const Window window = parse_window(file.required(r.key("", "window")));
  std::optional<TimeWindow> tw;
  if (const auto t = file.numbers(r.key("", "time_window"))) {
    if (t->size() != 2) throw ConfigError(fmt::format("{}: time_window needs start and end", file.origin()));
    tw.emplace((*t)[0], (*t)[1]);
  }

  GeneratorKind generator;
  if (kind == "labeled-superposition") {
    generator = LabeledSuperposition{spatial_law(r, "cases."), spatial_law(r, "controls.")};
  } else if (kind == "st-independent") {
    StIndependent law{spatial_law(r, "space."), UniformTimes{}};
    const std::string time = file.text_or(r.key("", "time"), "uniform");
    if (time == "clustered") {
      law.time = ClusteredTimes{r.count("", "time_centers"), r.positive("", "time_sigma")};
    } else if (time != "uniform") {
      throw ConfigError(fmt::format("{}: time must be uniform or clustered", file.origin()));
    }
    generator = std::move(law);
  } else if (kind == "st-interacting") {
    StInteracting law{r.positive("", "cluster_count"), r.positive("", "mean_offspring"), r.positive("", "sigma"),
                      r.positive("", "sigma_t"), static_cast<std::size_t>(file.count_or(r.key("", "background"), 0))};
    generator = law;
  } else {
    r.used.insert("kind");
    std::visit([&](auto&& law) { generator = law; }, spatial_law(r, ""));
  }
  file.reject_unknown(r.used);
  return {GeneratorSpec{std::move(generator), *seed}, window, tw};
}

SynthRequest load_synth_spec(const std::filesystem::path& path) {
  return parse_synth_spec(KeyValueFile::load(path));
}

std::size_t write_synth(const SynthRequest& request, const std::filesystem::path& out) {
  const GeneratedPattern pattern = generate(request.spec, request.window, request.time_window);
  std::ofstream os(out, std::ios::binary);
  if (!os) throw IoError(fmt::format("cannot write '{}'", out.string()));
  std::size_t rows = 0;
  std::visit(
      [&](const auto& p) {
        export_table(os, p);
        rows = p.size();
      },
      pattern);
  if (!os) throw IoError(fmt::format("failed writing '{}'", out.string()));
  return rows;
}

}  // namespace stpp::app
