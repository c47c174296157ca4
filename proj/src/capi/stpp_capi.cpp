#include "stpp/stpp.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "pipelines.hpp"
#include "stpp/errors.hpp"
#include "stpp/secondorder.hpp"
#include "stpp/spacetime.hpp"
#include "synthspec.hpp"

struct stpp_pattern {
  stpp::Window window;
  std::vector<stpp::Point> points;
  std::optional<std::vector<stpp::Mark>> marks;
  std::optional<std::vector<double>> times;
  std::optional<stpp::TimeWindow> time_window;
};

namespace {

thread_local std::string g_last_error;
thread_local std::string g_last_kind;

stpp_status fail(stpp_status status, const char* kind, const std::string& message) {
  g_last_kind = kind;
  g_last_error = message;
  return status;
}

stpp_status from_error(const stpp::Error& e) {
  using stpp::ErrorCode;
  switch (e.code()) {
    case ErrorCode::Config:
    case ErrorCode::Io: return fail(STPP_ERR_CONFIG, stpp::error_code_name(e.code()), e.what());
    case ErrorCode::InsufficientData:
    case ErrorCode::Domain:
    case ErrorCode::EmptyPattern: return fail(STPP_ERR_DATA, stpp::error_code_name(e.code()), e.what());
    case ErrorCode::DegenerateStatistic: return fail(STPP_ERR_DEGENERATE, stpp::error_code_name(e.code()), e.what());
  }
  return fail(STPP_ERR_INTERNAL, "internal", e.what());
}

// Runs `body`, translating exceptions into status codes.
template <class F>
stpp_status guarded(F&& body) {
  g_last_error.clear();
  g_last_kind.clear();
  try {
    body();
    return STPP_OK;
  } catch (const stpp::Error& e) {
    return from_error(e);
  } catch (const nlohmann::json::exception& e) {
    return fail(STPP_ERR_INTERNAL, "internal", e.what());
  } catch (const std::bad_alloc&) {
    return fail(STPP_ERR_INTERNAL, "internal", "out of memory");
  } catch (const std::exception& e) {
    return fail(STPP_ERR_INTERNAL, "internal", e.what());
  } catch (...) {
    return fail(STPP_ERR_INTERNAL, "internal", "unknown failure");
  }
}

stpp_status invalid(const char* message) { return fail(STPP_ERR_INVALID_ARGUMENT, "invalid-argument", message); }

std::vector<stpp::Point> zip(const double* x, const double* y, size_t n) {
  std::vector<stpp::Point> pts(n);
  for (size_t i = 0; i < n; ++i) pts[i] = {x[i], y[i]};
  return pts;
}

stpp::PointPattern points(const stpp_pattern& p) { return stpp::PointPattern(p.window, p.points); }

stpp::STPattern st(const stpp_pattern& p) {
  if (!p.times) throw stpp::ConfigError("pattern has no times; call stpp_pattern_set_times first");
  return stpp::STPattern(points(p), *p.times, *p.time_window);
}

stpp::KNormalization norm(stpp_normalization n) {
  return n == STPP_NORM_POINT_COUNT ? stpp::KNormalization::PointCount : stpp::KNormalization::Unbiased;
}

template <class Grid>
Grid grid(const double* v, size_t n) {
  return Grid(std::vector<double>(v, v + n));
}

void copy_out(const std::vector<double>& values, double* out) { std::copy(values.begin(), values.end(), out); }

char* duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* stpp_version(void) { return stpp::app::kToolVersion; }
const char* stpp_last_error(void) { return g_last_error.c_str(); }
const char* stpp_last_error_kind(void) { return g_last_kind.c_str(); }

const char* stpp_status_name(stpp_status status) {
  switch (status) {
    case STPP_OK: return "ok";
    case STPP_ERR_INTERNAL: return "internal";
    case STPP_ERR_CONFIG: return "config";
    case STPP_ERR_DATA: return "data";
    case STPP_ERR_DEGENERATE: return "degenerate-statistic";
    case STPP_ERR_INVALID_ARGUMENT: return "invalid-argument";
  }
  return "unknown";
}

stpp_status stpp_pattern_create_rect(double x_min, double y_min, double x_max, double y_max, const double* x,
                                     const double* y, size_t n, stpp_pattern** out) {
  if (!out || (n > 0 && (!x || !y))) return invalid("null pointer argument");
  return guarded([&] {
    auto w = stpp::Window::rectangle(x_min, y_min, x_max, y_max);
    auto pts = zip(x, y, n);
    stpp::PointPattern check(w, pts);
    *out = new stpp_pattern{std::move(w), std::move(pts), {}, {}, {}};
  });
}

stpp_status stpp_pattern_create_polygon(const double* vx, const double* vy, size_t vertices, const double* x,
                                        const double* y, size_t n, stpp_pattern** out) {
  if (!out || !vx || !vy || (n > 0 && (!x || !y))) return invalid("null pointer argument");
  return guarded([&] {
    auto w = stpp::Window::polygon(zip(vx, vy, vertices));
    auto pts = zip(x, y, n);
    stpp::PointPattern check(w, pts);
    *out = new stpp_pattern{std::move(w), std::move(pts), {}, {}, {}};
  });
}

void stpp_pattern_destroy(stpp_pattern* pattern) { delete pattern; }

stpp_status stpp_pattern_size(const stpp_pattern* pattern, size_t* out) {
  if (!pattern || !out) return invalid("null pointer argument");
  *out = pattern->points.size();
  return STPP_OK;
}

stpp_status stpp_pattern_set_times(stpp_pattern* pattern, const double* t, size_t n, double start, double end) {
  if (!pattern || (n > 0 && !t)) return invalid("null pointer argument");
  if (n != pattern->points.size()) return invalid("time count differs from point count");
  return guarded([&] {
    stpp::TimeWindow tw(start, end);
    std::vector<double> times(t, t + n);
    stpp::STPattern check(stpp::PointPattern(pattern->window, pattern->points), times, tw);
    pattern->times = std::move(times);
    pattern->time_window = tw;
  });
}

stpp_status stpp_pattern_set_marks(stpp_pattern* pattern, const int* is_case, size_t n) {
  if (!pattern || (n > 0 && !is_case)) return invalid("null pointer argument");
  if (n != pattern->points.size()) return invalid("mark count differs from point count");
  std::vector<stpp::Mark> marks(n);
  for (size_t i = 0; i < n; ++i) marks[i] = is_case[i] ? stpp::Mark::Case : stpp::Mark::Control;
  pattern->marks = std::move(marks);
  return STPP_OK;
}

stpp_status stpp_k_hat(const stpp_pattern* pattern, const double* s, size_t ns, stpp_normalization normalization,
                       double* out) {
  if (!pattern || !s || !out) return invalid("null pointer argument");
  return guarded([&] {
    copy_out(stpp::k_hat(points(*pattern), grid<stpp::DistanceGrid>(s, ns), norm(normalization)).values, out);
  });
}

stpp_status stpp_l_hat(const stpp_pattern* pattern, const double* s, size_t ns, stpp_normalization normalization,
                       double* out) {
  if (!pattern || !s || !out) return invalid("null pointer argument");
  return guarded([&] {
    const auto k = stpp::k_hat(points(*pattern), grid<stpp::DistanceGrid>(s, ns), norm(normalization));
    copy_out(stpp::l_hat(k).values, out);
  });
}

stpp_status stpp_d_hat(const stpp_pattern* pattern, const double* s, size_t ns, stpp_normalization normalization,
                       double* out) {
  if (!pattern || !s || !out) return invalid("null pointer argument");
  return guarded([&] {
    if (!pattern->marks) throw stpp::ConfigError("pattern has no marks; call stpp_pattern_set_marks first");
    const stpp::MarkedPattern m(points(*pattern), *pattern->marks);
    copy_out(stpp::d_hat(m, grid<stpp::DistanceGrid>(s, ns), norm(normalization)).values, out);
  });
}

stpp_status stpp_k_hat_time(const stpp_pattern* pattern, const double* t, size_t nt, double* out) {
  if (!pattern || !t || !out) return invalid("null pointer argument");
  return guarded([&] { copy_out(stpp::k_hat_time(st(*pattern), grid<stpp::LagGrid>(t, nt)).values, out); });
}

stpp_status stpp_k_hat_st(const stpp_pattern* pattern, const double* s, size_t ns, const double* t, size_t nt,
                          double* out) {
  if (!pattern || !s || !t || !out) return invalid("null pointer argument");
  return guarded([&] {
    copy_out(stpp::k_hat_st(st(*pattern), grid<stpp::DistanceGrid>(s, ns), grid<stpp::LagGrid>(t, nt)).values(),
             out);
  });
}

stpp_status stpp_edge_weight(const stpp_pattern* pattern, double x, double y, double r, double* out, int* clamped) {
  if (!pattern || !out) return invalid("null pointer argument");
  return guarded([&] {
    const stpp::EdgeWeight w = stpp::spatial_edge_weight({x, y}, r, pattern->window);
    *out = w.weight;
    if (clamped) *clamped = w.clamped ? 1 : 0;
  });
}

stpp_status stpp_mc_test(const stpp_pattern* pattern, const double* s, size_t ns, const double* t, size_t nt,
                         size_t replicates, size_t variance_permutations, uint64_t seed, stpp_tail tail,
                         unsigned threads, stpp_mc_result* out) {
  if (!pattern || !s || !t || !out) return invalid("null pointer argument");
  return guarded([&] {
    stpp::MCTestOptions opt;
    opt.replicates = replicates;
    opt.variance_permutations = variance_permutations;
    opt.seed = seed;
    opt.tail = tail == STPP_TAIL_LOWER ? stpp::Tail::Lower : stpp::Tail::Upper;
    opt.threads = threads == 0 ? 1 : threads;
    const auto r = stpp::mc_interaction_test(st(*pattern), grid<stpp::DistanceGrid>(s, ns),
                                             grid<stpp::LagGrid>(t, nt), opt);
    *out = {r.u_observed, r.m,
            r.rank,       r.p_value,
            r.direction == stpp::Tail::Lower ? STPP_TAIL_LOWER : STPP_TAIL_UPPER,
            r.cells_used, r.cells_excluded};
  });
}

stpp_status stpp_run(const char* config_path, const char* pipeline, const uint64_t* seed, const char* out_dir,
                     unsigned threads, char** manifest_json) {
  if (!config_path || !pipeline) return invalid("null pointer argument");
  return guarded([&] {
    const auto cfg = stpp::app::load_config(config_path);
    const auto which = stpp::app::parse_pipeline(pipeline);
    stpp::app::RunOverrides o;
    if (seed) o.seed = *seed;
    if (out_dir) o.out_dir = std::filesystem::path(out_dir);
    if (threads > 0) o.threads = threads;
    const auto manifest = stpp::app::run_pipeline(cfg, which, o);
    if (manifest_json) *manifest_json = duplicate(manifest.to_json().dump(2));
  });
}

stpp_status stpp_validate(const char* config_path, char** report_json) {
  if (!config_path) return invalid("null pointer argument");
  return guarded([&] {
    const auto report = stpp::app::validate_config(config_path);
    if (report_json) *report_json = duplicate(report.dump(2));
  });
}

stpp_status stpp_synth(const char* spec_path, const char* out_path, size_t* rows) {
  if (!spec_path || !out_path) return invalid("null pointer argument");
  return guarded([&] {
    const size_t n = stpp::app::write_synth(stpp::app::load_synth_spec(spec_path), out_path);
    if (rows) *rows = n;
  });
}

void stpp_free_string(char* text) { std::free(text); }

}  // extern "C"
