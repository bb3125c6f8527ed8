#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "gwloc/dispersion.hpp"
#include "support.hpp"

using namespace gwloc;
using namespace gwloc::dispersion;

namespace {

const DispersionModel kLinear({ModeCurve::linear(5400.0)});
const DispersionModel kSqrt({ModeCurve::square_root(0.25)});

}  // namespace

TEST_CASE("wavenumber at zero frequency is zero") {
  CHECK(kLinear.wavenumber(0, 0.0) == 0.0);
  CHECK(kSqrt.wavenumber(0, 0.0) == 0.0);
}

TEST_CASE("linear wavenumber at 500 kHz") {
  const double omega = 2.0 * std::numbers::pi * 500e3;
  CHECK(kLinear.wavenumber(0, omega) == doctest::Approx(581.776).epsilon(1e-6));
}

TEST_CASE("square-root wavenumber scaled by alpha") {
  const double omega = 2.0 * std::numbers::pi * 1e6;
  const double expected = 1.2 * std::sqrt(omega / 0.25);
  CHECK(kSqrt.with_alpha(1.2).wavenumber(0, omega) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(6016.0).epsilon(1e-4));
}

TEST_CASE("group velocity closed forms") {
  CHECK(kLinear.group_velocity(0, 1e5) == doctest::Approx(5400.0));
  CHECK(kSqrt.group_velocity(0, 1e6) == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(kLinear.with_alpha(1.3).group_velocity(0, 3e6) == doctest::Approx(4153.846153846).epsilon(1e-10));
}

TEST_CASE("invalid arguments raise the documented errors") {
  CHECK(testing::error_code([] { kLinear.wavenumber(1, 1.0); }) == ErrorCode::kIndex);
  CHECK(testing::error_code([] { kLinear.wavenumber(0, -1.0); }) == ErrorCode::kDomain);
  CHECK(testing::error_code([] { kSqrt.group_velocity(0, 0.0); }) == ErrorCode::kDomain);
  CHECK(testing::error_code([] { DispersionModel({ModeCurve::linear(5400.0)}, 1.5); }) == ErrorCode::kDomain);
  CHECK(testing::error_code([] { DispersionModel({ModeCurve::linear(-1.0)}); }) != ErrorCode::kInternal);
}

TEST_CASE("wavenumber is strictly increasing and exactly proportional to alpha") {
  const DispersionModel model;
  for (std::size_t mode = 0; mode < model.mode_count(); ++mode) {
    double previous = -1.0;
    for (int i = 1; i <= 200; ++i) {
      const double omega = 2.0 * std::numbers::pi * 5e3 * i;
      const double k = model.wavenumber(mode, omega);
      CHECK(k > previous);
      previous = k;
      for (double a : {0.7, 0.85, 1.3}) {
        CHECK(model.with_alpha(a).wavenumber(mode, omega) == a * model.wavenumber(mode, omega));
      }
    }
  }
}

TEST_CASE("sample_alpha stays in range, is deterministic and centered") {
  double sum = 0.0;
  constexpr int kDraws = 10000;
  for (int s = 0; s < kDraws; ++s) {
    const double a = sample_alpha(static_cast<std::uint64_t>(s));
    REQUIRE(a >= kAlphaMin);
    REQUIRE(a <= kAlphaMax);
    sum += a;
  }
  CHECK(std::abs(sum / kDraws - 1.0) < 0.02);
  CHECK(sample_alpha(42) == sample_alpha(42));

  // Independent sampler with a different engine and distribution code.
  std::mt19937 engine(12345);
  std::normal_distribution<double> normal(1.0, 1.0);
  double oracle_sum = 0.0;
  for (int i = 0; i < kDraws; ++i) {
    double v;
    do {
      v = normal(engine);
    } while (v < 0.7 || v > 1.3);
    oracle_sum += v;
  }
  CHECK(std::abs(sum / kDraws - oracle_sum / kDraws) < 0.02);
}
