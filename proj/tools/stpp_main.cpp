#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "stpp/stpp.h"

namespace {

int report_failure(stpp_status status) {
  nlohmann::ordered_json err = {
      {"error", {{"status", stpp_status_name(status)}, {"kind", stpp_last_error_kind()}, {"message", stpp_last_error()}}}};
  std::cerr << err.dump() << '\n';
  // invalid arguments come from the caller's command line
  return status == STPP_ERR_INVALID_ARGUMENT ? 2 : static_cast<int>(status);
}

int print_and_free(char* text) {
  if (text) std::cout << text << '\n';
  stpp_free_string(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stpp: spatial and spatio-temporal point-pattern analysis"};
  app.set_version_flag("--version", std::string(stpp_version()));
  app.require_subcommand(1);

  std::string config, pipeline, out_dir, spec, out_file;
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;

  auto* run = app.add_subcommand("run", "run one analysis pipeline");
  run->add_option("--config", config, "configuration file")->required();
  run->add_option("--pipeline", pipeline,
                  "intensity | csr-l | diggle-d | temporal-hist | temporal-k | st-k | st-diagnostics | "
                  "st-mc-test | synth-validate")
      ->required();
  run->add_option("--seed", seed, "random seed (overrides the config)");
  run->add_option("--out", out_dir, "output directory (overrides the config)");
  run->add_option("--threads", threads, "worker threads (overrides the config)")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "check a configuration and its input without analysing");
  validate->add_option("--config", config, "configuration file")->required();

  auto* synth = app.add_subcommand("synth", "simulate a point pattern from a generator spec");
  synth->add_option("--spec", spec, "generator spec file")->required();
  synth->add_option("--out", out_file, "output table")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    nlohmann::ordered_json err = {{"error", {{"status", "config"}, {"kind", "usage"}, {"message", e.what()}}}};
    std::cerr << err.dump() << '\n';
    return 2;
  }

  if (*run) {
    char* manifest = nullptr;
    const std::uint64_t seed_value = seed.value_or(0);
    const stpp_status st = stpp_run(config.c_str(), pipeline.c_str(), seed ? &seed_value : nullptr,
                                    out_dir.empty() ? nullptr : out_dir.c_str(), threads, &manifest);
    if (st != STPP_OK) return report_failure(st);
    return print_and_free(manifest);
  }
  if (*validate) {
    char* report = nullptr;
    const stpp_status st = stpp_validate(config.c_str(), &report);
    if (st != STPP_OK) return report_failure(st);
    return print_and_free(report);
  }
  size_t rows = 0;
  const stpp_status st = stpp_synth(spec.c_str(), out_file.c_str(), &rows);
  if (st != STPP_OK) return report_failure(st);
  std::cout << nlohmann::ordered_json{{"out", out_file}, {"rows", rows}}.dump() << '\n';
  return 0;
}
