#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "config.hpp"

namespace stpp::app {

enum class Pipeline {
  Intensity,
  CsrL,
  DiggleD,
  TemporalHist,
  TemporalK,
  StK,
  StDiagnostics,
  StMcTest,
  SynthValidate,
};

const char* pipeline_name(Pipeline pipeline);
Pipeline parse_pipeline(const std::string& text);

extern const char* const kToolVersion;

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<unsigned> threads;
};

struct OutputFile {
  std::string path;  // relative to the output directory, '/' separated
  std::uintmax_t bytes = 0;
  std::string fnv1a;
};

struct RunManifest {
  std::string tool_version;
  std::string config_hash;
  std::string pipeline;
  std::optional<std::uint64_t> seed;
  std::vector<std::pair<std::string, double>> timing;  // seconds
  std::vector<OutputFile> outputs;
  std::vector<std::string> warnings;
  nlohmann::ordered_json results = nlohmann::ordered_json::object();

  nlohmann::ordered_json to_json() const;
};

// Runs one pipeline and writes its outputs plus manifest.json into the
// output directory.
RunManifest run_pipeline(const AnalysisConfig& config, Pipeline pipeline,
                         const RunOverrides& overrides = {});

// Dry run: parses the config, checks the input schema and ingests the
// events without analysing them.
nlohmann::ordered_json validate_config(const std::filesystem::path& path);

}  // namespace stpp::app
