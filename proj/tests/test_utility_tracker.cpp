#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>

#include "sea/error.hpp"
#include "sea/stats.hpp"
#include "sea/utility_tracker.hpp"

using namespace sea;

TEST_CASE("type-7 quantiles") {
  const std::vector<double> v{0.9, 0.5, 0.7};
  CHECK(stats::median(v) == doctest::Approx(0.7));
  CHECK(stats::quantile(v, 0.25) == doctest::Approx(0.6));
  CHECK(stats::quantile(v, 0.75) == doctest::Approx(0.8));
  CHECK(stats::iqr(v) == doctest::Approx(0.2));
  const std::vector<double> four{1, 2, 3, 4};
  CHECK(stats::quantile(four, 0.25) == doctest::Approx(1.75));
  CHECK(stats::median(four) == doctest::Approx(2.5));
  CHECK(stats::variance(four) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("ema update") {
  const SmoothingParams p{0.9, 0.5, 5};
  UtilityTracker t(3, 5);
  t.record(0.5, p, 0);
  CHECK(t.ema() == 0.5);
  t.record(1.0, p, 1);
  CHECK(t.ema() == doctest::Approx(0.55));
  CHECK(t.probe_count() == 2);
  CHECK(t.last_audit_cycle() == 1);
  CHECK(t.history().size() == 2);
}

TEST_CASE("robust score examples") {
  const SmoothingParams p{0.9, 0.5, 5};
  SUBCASE("three-value window") {
    // Feed raw values that reproduce the smoothed history [0.5, 0.7, 0.9].
    UtilityTracker t(0, 5);
    t.record(0.5, p, 0);
    t.record((0.7 - 0.9 * 0.5) / 0.1, p, 1);
    t.record((0.9 - 0.9 * 0.7) / 0.1, p, 2);
    CHECK(t.history()[1] == doctest::Approx(0.7));
    CHECK(t.robust_score(p) == doctest::Approx(0.6));
  }
  SUBCASE("single sample") {
    UtilityTracker t(0, 5);
    t.record(0.4, p, 0);
    CHECK(t.robust_score(SmoothingParams{0.9, 7.0, 5}) == 0.4);
  }
  SUBCASE("constant history") {
    UtilityTracker t(0, 4);
    for (int k = 0; k < 4; ++k) t.record(0.25, p, k);
    CHECK(t.robust_score(SmoothingParams{0.9, 3.0, 4}) == 0.25);
  }
}

TEST_CASE("tracker errors") {
  const SmoothingParams p;
  UtilityTracker t(0, 5);
  CHECK_THROWS_AS(t.robust_score(p), Error);
  CHECK_THROWS_AS(t.record(std::numeric_limits<double>::quiet_NaN(), p, 0), Error);
  CHECK_THROWS_AS(t.record(std::numeric_limits<double>::infinity(), p, 0), Error);
  CHECK(t.probe_count() == 0);
  CHECK_THROWS_AS(UtilityTracker(0, 2), Error);
  CHECK_THROWS_AS(UtilityTracker(0, 6), Error);
  CHECK_THROWS_AS((SmoothingParams{1.0, 0.5, 5}.validate()), Error);
  CHECK_THROWS_AS((SmoothingParams{0.9, -0.1, 5}.validate()), Error);
}

TEST_CASE("record_audit leaves the input untouched") {
  const SmoothingParams p;
  const UtilityTracker t(1, 5);
  const UtilityTracker u = record_audit(t, 2.0, p, 4);
  CHECK(t.probe_count() == 0);
  CHECK(u.probe_count() == 1);
  CHECK(u.ema() == 2.0);
}

TEST_CASE("property: window, probe count and score ordering") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 2.0);
  for (int window = 3; window <= 5; ++window) {
    for (int trial = 0; trial < 50; ++trial) {
      const SmoothingParams p{0.5 + 0.4 * (trial % 5) / 4.0, 0.1 * trial, window};
      UtilityTracker t(0, window);
      for (int k = 0; k < 30; ++k) {
        t.record(g(rng), p, k);
        CHECK(t.history().size() <= static_cast<std::size_t>(window));
        CHECK(t.probe_count() == k + 1);
        CHECK(std::isfinite(t.ema()));
        CHECK(t.history().back() == t.ema());
        const std::vector<double> h(t.history().begin(), t.history().end());
        const double med = stats::median(h);
        CHECK(t.robust_score(p) <= med);
        CHECK((t.robust_score(p) == med) == (stats::iqr(h) == 0.0 || p.lambda_s == 0.0));
      }
    }
  }
}

TEST_CASE("property: ema stays within the range of its inputs") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  const SmoothingParams p{0.8, 0.5, 5};
  UtilityTracker t(0, 5);
  double lo = 1e9, hi = -1e9;
  for (int k = 0; k < 200; ++k) {
    const double x = u(rng);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    t.record(x, p, k);
    CHECK(t.ema() >= lo - 1e-12);
    CHECK(t.ema() <= hi + 1e-12);
  }
}
