#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "keyvalue.hpp"
#include "stpp/synth.hpp"

namespace stpp::app {

// A generator spec file: `kind`, `seed`, `window`, optional `time_window`
// plus the parameters of the kind. Labeled superpositions prefix the two
// laws with `cases.` and `controls.`; st-independent prefixes its spatial
// law with `space.`.
struct SynthRequest {
  GeneratorSpec spec;
  Window window;
  std::optional<TimeWindow> time_window;
};

SynthRequest parse_synth_spec(const KeyValueFile& file);
SynthRequest load_synth_spec(const std::filesystem::path& path);

// Generates and writes the pattern as a delimited table; returns the row count.
std::size_t write_synth(const SynthRequest& request, const std::filesystem::path& out);

}  // namespace stpp::app
