/* C interface to the stpp point-pattern library. */
#ifndef STPP_STPP_H
#define STPP_STPP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define STPP_API __declspec(dllexport)
#else
#define STPP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum stpp_status {
  STPP_OK = 0,
  STPP_ERR_INTERNAL = 1,
  STPP_ERR_CONFIG = 2,
  STPP_ERR_DATA = 3,
  STPP_ERR_DEGENERATE = 4,
  STPP_ERR_INVALID_ARGUMENT = 5
} stpp_status;

typedef enum stpp_normalization { STPP_NORM_UNBIASED = 0, STPP_NORM_POINT_COUNT = 1 } stpp_normalization;

typedef enum stpp_tail { STPP_TAIL_UPPER = 0, STPP_TAIL_LOWER = 1 } stpp_tail;

/* Opaque event pattern: a window, locations and optional marks and times. */
typedef struct stpp_pattern stpp_pattern;

typedef struct stpp_mc_result {
  double u_observed;
  size_t m;
  size_t rank;
  double p_value;
  stpp_tail direction;
  size_t cells_used;
  size_t cells_excluded;
} stpp_mc_result;

STPP_API const char* stpp_version(void);
/* Message of the last failed call on this thread, "" if none. */
STPP_API const char* stpp_last_error(void);
/* Short kind of the last failure: "config", "insufficient-data", ... */
STPP_API const char* stpp_last_error_kind(void);
STPP_API const char* stpp_status_name(stpp_status status);

STPP_API stpp_status stpp_pattern_create_rect(double x_min, double y_min, double x_max, double y_max,
                                              const double* x, const double* y, size_t n, stpp_pattern** out);
STPP_API stpp_status stpp_pattern_create_polygon(const double* vx, const double* vy, size_t vertices,
                                                 const double* x, const double* y, size_t n,
                                                 stpp_pattern** out);
STPP_API void stpp_pattern_destroy(stpp_pattern* pattern);
STPP_API stpp_status stpp_pattern_size(const stpp_pattern* pattern, size_t* out);
/* Times must lie in [start, end]. */
STPP_API stpp_status stpp_pattern_set_times(stpp_pattern* pattern, const double* t, size_t n, double start,
                                            double end);
/* Nonzero marks a case, zero a control. */
STPP_API stpp_status stpp_pattern_set_marks(stpp_pattern* pattern, const int* is_case, size_t n);

/* Estimator outputs are caller-allocated arrays of the grid length. */
STPP_API stpp_status stpp_k_hat(const stpp_pattern* pattern, const double* s, size_t ns,
                                stpp_normalization normalization, double* out);
STPP_API stpp_status stpp_l_hat(const stpp_pattern* pattern, const double* s, size_t ns,
                                stpp_normalization normalization, double* out);
STPP_API stpp_status stpp_d_hat(const stpp_pattern* pattern, const double* s, size_t ns,
                                stpp_normalization normalization, double* out);
STPP_API stpp_status stpp_k_hat_time(const stpp_pattern* pattern, const double* t, size_t nt, double* out);
/* out has ns * nt entries, row-major with t varying fastest. */
STPP_API stpp_status stpp_k_hat_st(const stpp_pattern* pattern, const double* s, size_t ns, const double* t,
                                   size_t nt, double* out);
/* Isotropic edge weight of a circle of radius r about (x, y) in the pattern's window. */
STPP_API stpp_status stpp_edge_weight(const stpp_pattern* pattern, double x, double y, double r, double* out,
                                      int* clamped);
STPP_API stpp_status stpp_mc_test(const stpp_pattern* pattern, const double* s, size_t ns, const double* t,
                                  size_t nt, size_t replicates, size_t variance_permutations, uint64_t seed,
                                  stpp_tail tail, unsigned threads, stpp_mc_result* out);

/* Runs a pipeline from a config file. seed, out_dir may be NULL; threads 0
   keeps the config value. On success *manifest_json receives the manifest,
   to be released with stpp_free_string. */
STPP_API stpp_status stpp_run(const char* config_path, const char* pipeline, const uint64_t* seed,
                              const char* out_dir, unsigned threads, char** manifest_json);
STPP_API stpp_status stpp_validate(const char* config_path, char** report_json);
STPP_API stpp_status stpp_synth(const char* spec_path, const char* out_path, size_t* rows);
STPP_API void stpp_free_string(char* text);

#ifdef __cplusplus
}
#endif

#endif
