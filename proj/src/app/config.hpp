#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "keyvalue.hpp"
#include "stpp/intensity.hpp"
#include "stpp/patterns.hpp"
#include "stpp/secondorder.hpp"
#include "stpp/spacetime.hpp"

namespace stpp::app {

enum class TimeFormat { Number, IsoDate };
enum class Subset { All, Cases, Controls };
enum class Stratify { None, Year, Month, Week };

const char* subset_name(Subset subset);
const char* stratify_name(Stratify stratify);

struct AnalysisConfig {
  KeyValueFile source;
  std::optional<std::filesystem::path> input;
  IngestSchema schema;
  TimeFormat time_format = TimeFormat::Number;
  double epoch_days = 0.0;  // calendar origin of t = 0, days since 1970-01-01
  bool has_calendar = false;
  TimeResolution time_unit = TimeResolution::Abstract;
  std::optional<Window> window;
  std::optional<TimeWindow> time_window;

  std::optional<double> bandwidth;
  KernelVariant kernel = KernelVariant::AreaNormalized;
  GridSpec grid;
  double ratio_floor = 1e-12;

  std::optional<std::vector<double>> s_values;
  std::size_t s_count = 10;
  std::optional<double> s_max;
  std::optional<std::vector<double>> t_values;
  std::size_t t_count = 10;
  std::optional<double> t_max;
  KNormalization normalization = KNormalization::Unbiased;

  std::size_t envelope_replicates = 99;
  double envelope_level = 0.95;
  double csr_level = 0.99;
  std::size_t mc_replicates = 999;
  std::size_t variance_permutations = 199;
  Tail tail = Tail::Upper;
  std::optional<std::uint64_t> seed;

  Subset subset = Subset::All;
  std::optional<TimeBin> hist_bin;
  std::optional<double> hist_width;
  Stratify stratify = Stratify::None;

  std::filesystem::path out_dir = "out";
  unsigned threads = 1;
  std::string validation_scale = "full";  // synth-validate: full or quick

  std::string hash() const;  // FNV-1a over the config file bytes
};

// Reads and validates a config file. Relative paths resolve against the
// config file's directory.
AnalysisConfig load_config(const std::filesystem::path& path);

// 64-bit FNV-1a as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Parses "rect x0 y0 x1 y1" or "polygon x1 y1 x2 y2 ...".
Window parse_window(const std::string& text);

}  // namespace stpp::app
