#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypnos/errors.hpp"
#include "hypnos/rng.hpp"
#include "hypnos/vitals.hpp"

using namespace hypnos;

namespace {

constexpr double kFsPpg = 50.0;
constexpr double kFsImu = 50.0;

// Gaussian systolic peaks at a fixed rate, amplitude ~100 device units.
std::vector<double> pulse_train(double bpm, double seconds, double amp = 100.0,
                                double noise = 0.0, std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<double> x(static_cast<std::size_t>(seconds * kFsPpg), 0.0);
  double period = 60.0 / bpm;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = static_cast<double>(i) / kFsPpg;
    double u = std::fmod(t, period) / period;
    x[i] = amp * (std::exp(-std::pow((u - 0.18) / 0.07, 2.0)) +
                  0.35 * std::exp(-std::pow((u - 0.5) / 0.1, 2.0)));
    if (noise > 0.0) x[i] += rng.normal(0.0, noise);
  }
  return x;
}

}  // namespace

TEST_CASE("heart rate recovers a planted 60 bpm train") {
  auto ch = pulse_train(60.0, 30.0);
  HeartRateTracker tracker;
  for (int w = 0; w < 6; ++w) {
    std::array<std::span<const double>, 3> window;
    for (int c = 0; c < 3; ++c)
      window[c] = std::span<const double>(ch).subspan(
          static_cast<std::size_t>(w) * 250, 250);
    HrEstimate est = tracker.process(window, kFsPpg, 5.0 * w);
    REQUIRE(est.quality);
    CHECK(est.bpm == doctest::Approx(60.0).epsilon(1.0 / 60.0));
  }
}

TEST_CASE("a noisy channel is rejected and the rest still work") {
  auto good = pulse_train(90.0, 5.0);
  Rng rng(3);
  std::vector<double> bad(250);
  for (double& v : bad) v = rng.normal(0.0, 50.0);
  std::array<std::span<const double>, 3> window{good, good, bad};
  auto raw = hr_from_window(window, kFsPpg);
  REQUIRE(raw.has_value());
  CHECK(*raw == doctest::Approx(90.0).epsilon(1.0 / 90.0));
}

TEST_CASE("saturated channels produce a no-quality estimate") {
  std::vector<double> sat(250, 40000.0);
  std::array<std::span<const double>, 3> window{sat, sat, sat};
  HeartRateTracker tracker;
  HrEstimate est = tracker.process(window, kFsPpg, 0.0);
  CHECK_FALSE(est.quality);
}

TEST_CASE("respiratory rate recovers planted rates") {
  for (double brpm : {12.0, 20.0}) {
    std::vector<double> y(static_cast<std::size_t>(60.0 * kFsImu));
    for (std::size_t i = 0; i < y.size(); ++i)
      y[i] = 1.0 + 0.012 * std::sin(2.0 * M_PI * (brpm / 60.0) *
                                    static_cast<double>(i) / kFsImu);
    std::vector<bool> mask(y.size(), false);
    RrEstimate est = respiratory_rate(y, mask, kFsImu, 0.0);
    CHECK(est.brpm == doctest::Approx(brpm).epsilon(0.5 / brpm));
  }
}

TEST_CASE("respiratory rate survives a masked movement burst") {
  double brpm = 20.0;
  std::vector<double> y(static_cast<std::size_t>(60.0 * kFsImu));
  Rng rng(9);
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = 1.0 + 0.012 * std::sin(2.0 * M_PI * (brpm / 60.0) *
                                  static_cast<double>(i) / kFsImu);
  std::vector<bool> mask(y.size(), false);
  for (std::size_t i = 1200; i < 1290; ++i) {
    y[i] += rng.uniform(-0.8, 0.8);
    mask[i] = true;
  }
  RrEstimate est = respiratory_rate(y, mask, kFsImu, 0.0);
  CHECK(est.brpm == doctest::Approx(brpm).epsilon(1.0 / brpm));
}

TEST_CASE("flat IMU axis has too few breaths") {
  std::vector<double> y(static_cast<std::size_t>(60.0 * kFsImu), 1.0);
  std::vector<bool> mask(y.size(), false);
  CHECK_THROWS_AS(respiratory_rate(y, mask, kFsImu, 0.0), Error);
}

TEST_CASE("gravity quantizes to the five postures") {
  CHECK(posture_from_gravity(0.0, 0.0, 1.0) == Posture::Supine);
  CHECK(posture_from_gravity(0.0, 0.05, -0.99) == Posture::Prone);
  CHECK(posture_from_gravity(1.0, 0.1, 0.2) == Posture::LeftSide);
  CHECK(posture_from_gravity(-0.95, 0.0, 0.1) == Posture::RightSide);
  CHECK(posture_from_gravity(0.05, 0.99, 0.0) == Posture::Upright);
}

TEST_CASE("posture hysteresis holds through a boundary wobble") {
  PostureTracker tracker;
  std::vector<bool> mask(500, false);
  auto window = [&](double angle_deg) {
    // Gravity rotated from +Z toward +X by the given angle.
    double a = angle_deg * M_PI / 180.0;
    static std::vector<double> ax, ay, az;
    ax.assign(500, std::sin(a));
    ay.assign(500, 0.0);
    az.assign(500, std::cos(a));
    return tracker.update(ax, ay, az, mask);
  };
  CHECK(window(0.0) == Posture::Supine);
  // Wobble +-10 deg around the 45 deg boundary: the label must not toggle.
  for (double a : {35.0, 55.0, 40.0, 52.0, 44.0, 54.0})
    CHECK(window(a) == Posture::Supine);
  // A decisive rotation past 60 deg switches.
  CHECK(window(75.0) == Posture::LeftSide);
  // And wobbling back within hysteresis of the new label keeps it.
  CHECK(window(55.0) == Posture::LeftSide);
}

TEST_CASE("posture update needs unmasked samples") {
  PostureTracker tracker;
  std::vector<double> ax(100, 0.0), ay(100, 0.0), az(100, 1.0);
  std::vector<bool> mask(100, true);
  CHECK_THROWS_AS(tracker.update(ax, ay, az, mask), Error);
}
