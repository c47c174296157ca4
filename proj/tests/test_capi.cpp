#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "doctest.h"
#include "stpp/stpp.h"

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Handle {
  stpp_pattern* p = nullptr;
  ~Handle() { stpp_pattern_destroy(p); }
};

}  // namespace

TEST_CASE("pattern handles") {
  const double x[] = {0.1, 0.2, 0.3};
  const double y[] = {0.1, 0.2, 0.3};
  Handle h;
  REQUIRE(stpp_pattern_create_rect(0, 0, 1, 1, x, y, 3, &h.p) == STPP_OK);
  size_t n = 0;
  CHECK(stpp_pattern_size(h.p, &n) == STPP_OK);
  CHECK(n == 3);

  const double t[] = {0.5, 1.5, 9.0};
  CHECK(stpp_pattern_set_times(h.p, t, 3, 0, 5) == STPP_ERR_DATA);
  CHECK(std::string(stpp_last_error_kind()) == "domain");
  CHECK(stpp_pattern_set_times(h.p, t, 2, 0, 10) == STPP_ERR_INVALID_ARGUMENT);
  CHECK(stpp_pattern_set_times(h.p, t, 3, 0, 10) == STPP_OK);
  CHECK(std::string(stpp_last_error()).empty());

  Handle outside;
  const double xo[] = {2.0};
  CHECK(stpp_pattern_create_rect(0, 0, 1, 1, xo, y, 1, &outside.p) == STPP_ERR_DATA);
  CHECK(outside.p == nullptr);
  CHECK(stpp_pattern_create_rect(0, 0, 1, 1, x, y, 1, nullptr) == STPP_ERR_INVALID_ARGUMENT);
  CHECK(std::string(stpp_status_name(STPP_ERR_DEGENERATE)) == "degenerate-statistic");
  CHECK(std::strlen(stpp_version()) > 0);
}

TEST_CASE("two-point K through the C API") {
  // Two points 0.1 apart, far from the edges of a 10 x 10 square.
  const double x[] = {5.0, 5.1};
  const double y[] = {5.0, 5.0};
  Handle h;
  REQUIRE(stpp_pattern_create_rect(0, 0, 10, 10, x, y, 2, &h.p) == STPP_OK);
  const double s[] = {0.05, 0.2};
  double k[2];
  REQUIRE(stpp_k_hat(h.p, s, 2, STPP_NORM_UNBIASED, k) == STPP_OK);
  CHECK(k[0] == 0.0);
  CHECK(k[1] == doctest::Approx(100.0));
  double l[2];
  REQUIRE(stpp_l_hat(h.p, s, 2, STPP_NORM_UNBIASED, l) == STPP_OK);
  CHECK(l[1] == doctest::Approx(std::sqrt(100.0 / kPi) - 0.2));

  const double t[] = {1.0, 2.0};
  REQUIRE(stpp_pattern_set_times(h.p, t, 2, 0, 10) == STPP_OK);
  const double lag[] = {0.5, 2.0};
  double kst[4];
  REQUIRE(stpp_k_hat_st(h.p, s, 2, lag, 2, kst) == STPP_OK);
  CHECK(kst[0] == 0.0);
  CHECK(kst[1] == 0.0);
  CHECK(kst[2] == 0.0);
  CHECK(kst[3] > 0.0);
  double k2[2];
  REQUIRE(stpp_k_hat_time(h.p, lag, 2, k2) == STPP_OK);
  CHECK(k2[0] == 0.0);
  CHECK(k2[1] > 0.0);
}

TEST_CASE("edge weights through the C API") {
  const double x[] = {0.5};
  const double y[] = {0.5};
  Handle h;
  REQUIRE(stpp_pattern_create_rect(0, 0, 1, 1, x, y, 1, &h.p) == STPP_OK);
  double w = 0;
  int clamped = -1;
  REQUIRE(stpp_edge_weight(h.p, 0, 0, 0.1, &w, &clamped) == STPP_OK);
  CHECK(w == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(clamped == 0);
  REQUIRE(stpp_edge_weight(h.p, 0.5, 0, 0.1, &w, nullptr) == STPP_OK);
  CHECK(w == doctest::Approx(2.0).epsilon(1e-9));
  REQUIRE(stpp_edge_weight(h.p, 0.5, 0.5, 0.1, &w, nullptr) == STPP_OK);
  CHECK(w == 1.0);
  CHECK(stpp_edge_weight(h.p, 2, 2, 0.1, &w, nullptr) == STPP_ERR_DATA);

  Handle tri;
  const double vx[] = {0, 1, 0};
  const double vy[] = {0, 0, 1};
  REQUIRE(stpp_pattern_create_polygon(vx, vy, 3, x, y, 0, &tri.p) == STPP_OK);
  REQUIRE(stpp_edge_weight(tri.p, 0.2, 0.2, 0.05, &w, nullptr) == STPP_OK);
  CHECK(w == 1.0);
}

TEST_CASE("D and the MC test through the C API") {
  std::vector<double> x, y, t;
  std::vector<int> marks;
  for (int i = 0; i < 40; ++i) {
    x.push_back(0.05 + 0.9 * std::fmod(i * 0.618034, 1.0));
    y.push_back(0.05 + 0.9 * std::fmod(i * 0.414214, 1.0));
    t.push_back(std::fmod(i * 0.7548777, 1.0));
    marks.push_back(i % 2);
  }
  Handle h;
  REQUIRE(stpp_pattern_create_rect(0, 0, 1, 1, x.data(), y.data(), x.size(), &h.p) == STPP_OK);
  const double s[] = {0.05, 0.1};
  double d[2];
  CHECK(stpp_d_hat(h.p, s, 2, STPP_NORM_UNBIASED, d) == STPP_ERR_CONFIG);
  REQUIRE(stpp_pattern_set_marks(h.p, marks.data(), marks.size()) == STPP_OK);
  CHECK(stpp_d_hat(h.p, s, 2, STPP_NORM_UNBIASED, d) == STPP_OK);

  const double lag[] = {0.1, 0.2};
  stpp_mc_result r{};
  CHECK(stpp_mc_test(h.p, s, 2, lag, 2, 99, 19, 1, STPP_TAIL_UPPER, 1, &r) == STPP_ERR_CONFIG);
  REQUIRE(stpp_pattern_set_times(h.p, t.data(), t.size(), 0, 1) == STPP_OK);
  REQUIRE(stpp_mc_test(h.p, s, 2, lag, 2, 99, 19, 1, STPP_TAIL_UPPER, 1, &r) == STPP_OK);
  CHECK(r.m == 99);
  CHECK(r.rank >= 1);
  CHECK(r.rank <= 99);
  CHECK(r.p_value == doctest::Approx(static_cast<double>(r.rank) / 99.0));
  stpp_mc_result again{};
  REQUIRE(stpp_mc_test(h.p, s, 2, lag, 2, 99, 19, 1, STPP_TAIL_UPPER, 2, &again) == STPP_OK);
  CHECK(again.u_observed == r.u_observed);
  CHECK(again.rank == r.rank);
}

TEST_CASE("config errors surface as status codes") {
  char* out = nullptr;
  CHECK(stpp_run("/nonexistent/config.conf", "st-k", nullptr, nullptr, 0, &out) == STPP_ERR_CONFIG);
  CHECK(out == nullptr);
  CHECK(std::string(stpp_last_error()).find("nonexistent") != std::string::npos);
  CHECK(stpp_validate(nullptr, &out) == STPP_ERR_INVALID_ARGUMENT);
  CHECK(stpp_synth("/nonexistent/spec", "/tmp/x.csv", nullptr) == STPP_ERR_CONFIG);
}
