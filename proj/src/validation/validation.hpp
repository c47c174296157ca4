#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

// Simulation checks of the estimators and tests against known truths.
namespace stpp::validation {

struct Check {
  std::string id;
  std::string description;
  bool passed = false;
  std::string observed;
  std::string requirement;
  double seconds = 0.0;
};

struct Scale {
  std::size_t csr_replicates = 500;
  std::size_t csr_n = 200;
  std::size_t st_replicates = 200;
  std::size_t st_n = 300;
  std::size_t oracle_instances = 50;
  std::size_t oracle_max_n = 100;
  std::size_t null_trials = 400;
  std::size_t null_n = 100;
  std::size_t null_m = 199;
  std::size_t power_trials = 100;
  std::size_t power_m = 199;
  std::size_t variance_permutations = 99;
  std::size_t discrimination_trials = 100;
  std::size_t discrimination_n = 100;
  std::size_t calibration_trials = 200;
  std::size_t residual_replicates = 200;
  std::size_t residual_n = 200;

  static Scale full() { return {}; }
  static Scale quick();
};

struct Options {
  std::uint64_t seed = 20240601;
  unsigned threads = 1;
};

Check csr_unbiasedness(const Scale& scale, const Options& options);
Check st_benchmark(const Scale& scale, const Options& options);
Check origin_identity(const Options& options);
Check oracle_equivalence(const Scale& scale, const Options& options);
Check mc_null_calibration(const Scale& scale, const Options& options);
Check mc_power(const Scale& scale, const Options& options);
Check d_discrimination(const Scale& scale, const Options& options);
Check edge_weights();
Check p_value_mechanics(const Options& options);

Check rl_envelope_calibration(const Scale& scale, const Options& options);
Check csr_envelope_calibration(const Scale& scale, const Options& options);
Check thomas_exceeds_csr_band(const Scale& scale, const Options& options);
Check k_time_calibration(const Scale& scale, const Options& options);
Check st_difference_null_mean(const Scale& scale, const Options& options);
Check residual_null_moments(const Scale& scale, const Options& options);
Check gaussian_null_calibration(const Scale& scale, const Options& options);
Check histogram_multinomial(const Options& options);
Check intensity_mass(const Options& options);
Check thinning_equivalence(const Options& options);
Check relabel_uniformity(const Options& options);
Check permutation_uniformity(const Options& options);
Check generator_determinism(const Options& options);

// Every check above, in a fixed order. `progress` is called after each.
std::vector<Check> run_all(const Scale& scale, const Options& options,
                           const std::function<void(const Check&)>& progress = {});

}  // namespace stpp::validation
