#include "config.hpp"

#include <fmt/format.h>

#include <fstream>

#include "calendar.hpp"
#include "stpp/errors.hpp"

namespace stpp::app {
namespace {

const std::set<std::string> kKeys = {
    "input",         "x_column",    "y_column",      "t_column",
    "label_column",  "case_label",  "control_label", "delimiter",
    "time_format",   "epoch",       "time_unit",     "window",
    "window_file",   "time_window", "bandwidth",     "kernel",
    "grid",          "ratio_floor", "s_values",      "s_count",
    "s_max",         "t_values",    "t_count",       "t_max",
    "normalization", "replicates",  "envelope_level", "csr_level",
    "mc_replicates", "variance_permutations", "tail", "seed",
    "subset",        "hist_bin",    "hist_width",    "stratify",
    "out",           "threads",     "validation_scale",
};

Window read_window_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open window file '{}'", path.string()));
  std::vector<Point> vertices;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> v;
    try {
      v = parse_number_list(line);
    } catch (const ConfigError&) {
      continue;  // header row
    }
    if (v.size() != 2) throw ConfigError(fmt::format("window file '{}': expected x,y rows", path.string()));
    vertices.push_back({v[0], v[1]});
  }
  return Window::polygon(std::move(vertices));
}

template <typename Enum, typename Parser>
Enum parse_with(const KeyValueFile& kv, const std::string& key, Enum fallback, Parser parser) {
  const auto v = kv.text(key);
  if (!v) return fallback;
  try {
    return parser(*v);
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}: {}", kv.origin(), key, e.what()));
  }
}

Subset parse_subset(const std::string& text) {
  if (text == "all") return Subset::All;
  if (text == "cases") return Subset::Cases;
  if (text == "controls") return Subset::Controls;
  throw ConfigError(fmt::format("unknown subset '{}' (all, cases, controls)", text));
}

Stratify parse_stratify(const std::string& text) {
  if (text == "none") return Stratify::None;
  if (text == "year") return Stratify::Year;
  if (text == "month") return Stratify::Month;
  if (text == "week") return Stratify::Week;
  throw ConfigError(fmt::format("unknown stratification '{}' (none, year, month, week)", text));
}

Tail parse_tail(const std::string& text) {
  if (text == "upper" || text == "positive") return Tail::Upper;
  if (text == "lower" || text == "negative") return Tail::Lower;
  throw ConfigError(fmt::format("unknown tail '{}' (upper, lower)", text));
}

// Two bounds, each a number in time units or, with a calendar, a date.
std::pair<double, double> parse_number_list_or_dates(const std::string& text, const AnalysisConfig& c) {
  std::vector<std::string> tokens;
  std::string token;
  for (char ch : text + " ") {
    if (ch == ' ' || ch == ',' || ch == '\t') {
      if (!token.empty()) tokens.push_back(token);
      token.clear();
    } else {
      token += ch;
    }
  }
  if (tokens.size() != 2) throw ConfigError(fmt::format("{}: time_window: expected two bounds", c.source.origin()));
  auto bound = [&](const std::string& t) {
    if (const auto v = parse_number(t)) return *v;
    if (c.has_calendar) {
      if (const auto d = parse_iso_date(t)) return (*d - c.epoch_days) / days_per_unit(c.time_unit);
    }
    throw ConfigError(fmt::format("{}: time_window: '{}' is not a number{}", c.source.origin(), t,
                                  c.has_calendar ? " or date" : ""));
  };
  return {bound(tokens[0]), bound(tokens[1])};
}

}  // namespace

const char* subset_name(Subset subset) {
  switch (subset) {
    case Subset::All: return "all";
    case Subset::Cases: return "cases";
    case Subset::Controls: return "controls";
  }
  return "?";
}

const char* stratify_name(Stratify stratify) {
  switch (stratify) {
    case Stratify::None: return "none";
    case Stratify::Year: return "year";
    case Stratify::Month: return "month";
    case Stratify::Week: return "week";
  }
  return "?";
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

std::string AnalysisConfig::hash() const { return fnv1a_hex(source.text()); }

Window parse_window(const std::string& text) {
  const auto space = text.find(' ');
  const std::string kind = text.substr(0, space);
  const std::vector<double> v =
      space == std::string::npos ? std::vector<double>{} : parse_number_list(text.substr(space + 1));
  if (kind == "rect") {
    if (v.size() != 4) throw ConfigError("rect window needs x0 y0 x1 y1");
    return Window::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (kind == "polygon") {
    if (v.size() % 2 != 0) throw ConfigError("polygon window needs x y pairs");
    std::vector<Point> vertices;
    for (std::size_t i = 0; i < v.size(); i += 2) vertices.push_back({v[i], v[i + 1]});
    return Window::polygon(std::move(vertices));
  }
  throw ConfigError(fmt::format("unknown window kind '{}' (rect, polygon)", kind));
}

AnalysisConfig load_config(const std::filesystem::path& path) {
  AnalysisConfig c;
  c.source = KeyValueFile::load(path);
  const KeyValueFile& kv = c.source;
  kv.reject_unknown(kKeys);
  const std::filesystem::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    const std::filesystem::path fp(p);
    return fp.is_absolute() ? fp : base / fp;
  };

  if (const auto in = kv.text("input")) c.input = resolve(*in);
  c.schema.x_column = kv.text_or("x_column", "x");
  c.schema.y_column = kv.text_or("y_column", "y");
  c.schema.t_column = kv.text("t_column");
  c.schema.label_column = kv.text("label_column");
  c.schema.case_label = kv.text_or("case_label", "case");
  c.schema.control_label = kv.text_or("control_label", "control");
  if (const auto d = kv.text("delimiter")) {
    if (*d == "tab") {
      c.schema.delimiter = '\t';
    } else if (*d == "comma") {
      c.schema.delimiter = ',';
    } else if (d->size() == 1) {
      c.schema.delimiter = (*d)[0];
    } else {
      throw ConfigError(fmt::format("{}: delimiter: expected one character, 'tab' or 'comma'", kv.origin()));
    }
  }

  const std::string format = kv.text_or("time_format", "number");
  if (format == "number") {
    c.time_format = TimeFormat::Number;
  } else if (format == "iso-date") {
    c.time_format = TimeFormat::IsoDate;
  } else {
    throw ConfigError(fmt::format("{}: time_format: unknown '{}' (number, iso-date)", kv.origin(), format));
  }
  if (const auto e = kv.text("epoch")) {
    c.epoch_days = iso_date_days(*e);
    c.has_calendar = true;
  }
  if (c.time_format == TimeFormat::IsoDate) c.has_calendar = true;
  c.time_unit = parse_with(kv, "time_unit",
                           c.time_format == TimeFormat::IsoDate ? TimeResolution::Day : TimeResolution::Abstract,
                           parse_time_resolution);
  if (c.time_format == TimeFormat::IsoDate && c.time_unit == TimeResolution::Abstract) {
    throw ConfigError(fmt::format("{}: iso-date times need a calendar time_unit", kv.origin()));
  }
  if (c.has_calendar && c.time_unit == TimeResolution::Abstract) {
    throw ConfigError(fmt::format("{}: an epoch needs a calendar time_unit", kv.origin()));
  }
  if (c.time_format == TimeFormat::IsoDate) {
    const double epoch = c.epoch_days;
    const double unit = days_per_unit(c.time_unit);
    c.schema.parse_time = [epoch, unit](std::string_view text) -> std::optional<double> {
      const auto days = parse_iso_date(text);
      if (!days) return std::nullopt;
      return (*days - epoch) / unit;
    };
  }

  if (kv.has("window") && kv.has("window_file")) {
    throw ConfigError(fmt::format("{}: give either window or window_file", kv.origin()));
  }
  try {
    if (const auto w = kv.text("window")) {
      c.window = parse_window(*w);
    } else if (const auto wf = kv.text("window_file")) {
      c.window = read_window_file(resolve(*wf));
    }
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: window: {}", kv.origin(), e.what()));
  }

  if (const auto tw = kv.text("time_window")) {
    const auto parts = parse_number_list_or_dates(*tw, c);
    c.time_window = TimeWindow(parts.first, parts.second, c.time_unit);
  }

  c.bandwidth = kv.number("bandwidth");
  if (c.bandwidth && !(*c.bandwidth > 0)) throw ConfigError(fmt::format("{}: bandwidth must be > 0", kv.origin()));
  c.kernel = parse_with(kv, "kernel", KernelVariant::AreaNormalized, parse_kernel_variant);
  if (const auto g = kv.text("grid")) {
    const auto x = g->find('x');
    const auto nx = x == std::string::npos ? std::nullopt : parse_number(g->substr(0, x));
    const auto ny = x == std::string::npos ? std::nullopt : parse_number(g->substr(x + 1));
    if (!nx || !ny || *nx < 1 || *ny < 1 || *nx != std::floor(*nx) || *ny != std::floor(*ny)) {
      throw ConfigError(fmt::format("{}: grid: expected NXxNY, e.g. 256x256", kv.origin()));
    }
    c.grid = {static_cast<std::size_t>(*nx), static_cast<std::size_t>(*ny)};
  }
  c.ratio_floor = kv.number_or("ratio_floor", c.ratio_floor);

  c.s_values = kv.numbers("s_values");
  c.s_count = kv.count_or("s_count", c.s_count);
  c.s_max = kv.number("s_max");
  c.t_values = kv.numbers("t_values");
  c.t_count = kv.count_or("t_count", c.t_count);
  c.t_max = kv.number("t_max");
  if (c.s_values && (c.s_max || kv.has("s_count"))) {
    throw ConfigError(fmt::format("{}: give s_values or s_max/s_count, not both", kv.origin()));
  }
  if (c.t_values && (c.t_max || kv.has("t_count"))) {
    throw ConfigError(fmt::format("{}: give t_values or t_max/t_count, not both", kv.origin()));
  }
  c.normalization = parse_with(kv, "normalization", KNormalization::Unbiased, parse_normalization);

  c.envelope_replicates = kv.count_or("replicates", c.envelope_replicates);
  c.envelope_level = kv.number_or("envelope_level", c.envelope_level);
  c.csr_level = kv.number_or("csr_level", c.csr_level);
  for (double level : {c.envelope_level, c.csr_level}) {
    if (!(level > 0 && level < 1)) throw ConfigError(fmt::format("{}: levels must lie in (0, 1)", kv.origin()));
  }
  c.mc_replicates = kv.count_or("mc_replicates", c.mc_replicates);
  c.variance_permutations = kv.count_or("variance_permutations", c.variance_permutations);
  c.tail = parse_with(kv, "tail", Tail::Upper, parse_tail);
  c.seed = kv.count("seed");

  c.subset = parse_with(kv, "subset", Subset::All, parse_subset);
  if (c.subset != Subset::All && !c.schema.label_column) {
    throw ConfigError(fmt::format("{}: subset needs label_column", kv.origin()));
  }
  if (kv.has("hist_bin") && kv.has("hist_width")) {
    throw ConfigError(fmt::format("{}: give hist_bin or hist_width, not both", kv.origin()));
  }
  if (kv.has("hist_bin")) c.hist_bin = parse_with(kv, "hist_bin", TimeBin::Day, parse_time_bin);
  c.hist_width = kv.number("hist_width");
  c.stratify = parse_with(kv, "stratify", Stratify::None, parse_stratify);
  if (c.stratify != Stratify::None && (!c.has_calendar || !c.schema.t_column)) {
    throw ConfigError(fmt::format("{}: stratify needs calendar times (t_column with iso-date or an epoch)",
                                  kv.origin()));
  }

  c.out_dir = resolve(kv.text_or("out", "out"));
  const auto threads = kv.count_or("threads", 1);
  if (threads < 1 || threads > 1024) throw ConfigError(fmt::format("{}: threads must be 1..1024", kv.origin()));
  c.threads = static_cast<unsigned>(threads);
  c.validation_scale = kv.text_or("validation_scale", "full");
  if (c.validation_scale != "full" && c.validation_scale != "quick") {
    throw ConfigError(fmt::format("{}: validation_scale: expected full or quick", kv.origin()));
  }
  return c;
}

}  // namespace stpp::app
