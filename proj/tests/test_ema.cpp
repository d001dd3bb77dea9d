#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "fastface/ema.hpp"
#include "fastface/rng.hpp"

using fastface::EmaState;
using fastface::Rng;

TEST_CASE("first observation becomes the smoothed value") {
  EmaState ema(0.001);
  REQUIRE(ema.update(3.7) == 3.7);
  REQUIRE(ema.value == 3.7);
  REQUIRE(ema.initialized);
}

TEST_CASE("update blends toward the observation") {
  EmaState ema(0.5);
  ema.update(1.0);
  REQUIRE(ema.update(0.0) == 0.5);
  REQUIRE(ema.update(0.0) == 0.25);
}

TEST_CASE("constant stream is a fixed point") {
  const double c = GENERATE(0.0, 1.0, 2.5, -3.25, 1e-9, 1e12);
  EmaState ema(0.001);
  for (int i = 0; i < 200; ++i) {
    REQUIRE(ema.update(c) == c);  // bit-exact, not approximately
  }
}

TEST_CASE("degenerate smoothing factors") {
  SECTION("alpha = 0 freezes the first value") {
    EmaState ema(0.0);
    ema.update(4.0);
    ema.update(100.0);
    REQUIRE(ema.value == 4.0);
  }
  SECTION("alpha = 1 tracks the input exactly") {
    EmaState ema(1.0);
    ema.update(4.0);
    REQUIRE(ema.update(100.0) == 100.0);
  }
}

TEST_CASE("smoothed value never leaves the observed range") {
  // Exact containment, including rounding: checked against the running
  // min/max of everything seen so far, for awkward smoothing factors.
  const double alpha = GENERATE(1e-6, 0.001, 0.3333333333333333, 0.9999999, 1.0);
  Rng rng(99 + static_cast<std::uint64_t>(alpha * 1e7));
  EmaState ema(alpha);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int i = 0; i < 5000; ++i) {
    const double x = (rng.next_unit() - 0.5) * 2000.0;
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    const double v = ema.update(x);
    REQUIRE(v >= lo);
    REQUIRE(v <= hi);
  }
}

TEST_CASE("smoothing factor outside [0, 1] is rejected") {
  REQUIRE_THROWS_AS(EmaState(-0.1), std::invalid_argument);
  REQUIRE_THROWS_AS(EmaState(1.1), std::invalid_argument);
  REQUIRE_THROWS_AS(EmaState(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
}

TEST_CASE("non-finite observations are rejected without touching state") {
  EmaState ema(0.5);
  ema.update(2.0);
  REQUIRE_THROWS_AS(ema.update(std::numeric_limits<double>::quiet_NaN()),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(ema.update(std::numeric_limits<double>::infinity()),
                    std::invalid_argument);
  REQUIRE(ema.value == 2.0);
}

TEST_CASE("free-function form matches the member") {
  EmaState a(0.25);
  EmaState b(0.25);
  for (double x : {5.0, 3.0, 8.5, -1.0}) {
    REQUIRE(fastface::ema_update(a, x) == b.update(x));
  }
}
