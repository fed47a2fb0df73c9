#include <doctest.h>

#include <cmath>
#include <vector>

#include "hypnos/errors.hpp"
#include "hypnos/features.hpp"
#include "hypnos/filters.hpp"
#include "hypnos/rng.hpp"
#include "hypnos/spectral.hpp"

using namespace hypnos;

namespace {

std::vector<double> tone(double freq, double amp, double seconds, double fs,
                         double phase = 0.0) {
  std::vector<double> x(static_cast<std::size_t>(seconds * fs));
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] = amp * std::sin(2.0 * M_PI * freq * static_cast<double>(i) / fs + phase);
  return x;
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

constexpr double kFs = 250.0;

}  // namespace

TEST_CASE("preprocess clamps before filtering") {
  std::vector<double> x(7500, 0.0);
  x[100] = 600.0;
  x[200] = -800.0;
  auto y = preprocess(x, kFs);
  for (double v : y) CHECK(std::abs(v) <= 500.0 + 1e-9);
}

TEST_CASE("notch removes a 50 Hz tone almost entirely") {
  auto x = tone(50.0, 30.0, 30.0, kFs);
  auto y = preprocess(x, kFs);
  CHECK(rms(y) <= 0.05 * rms(x));
}

TEST_CASE("10 Hz passband is untouched by the notches") {
  auto x = tone(10.0, 20.0, 30.0, kFs);
  auto y = preprocess(x, kFs);
  CHECK(std::abs(rms(y) - rms(x)) / rms(x) <= 0.02);
}

TEST_CASE("bandpass magnitudes behave") {
  auto bp = design_bandpass(0.5, 35.0, kFs);
  double g10 = 1.0;
  for (const auto& q : bp) g10 *= q.magnitude_at(10.0, kFs);
  CHECK(g10 == doctest::Approx(1.0).epsilon(0.02));
  double g60 = 1.0;
  for (const auto& q : bp) g60 *= q.magnitude_at(60.0, kFs);
  CHECK(g60 < 0.4);
  CHECK_THROWS_AS(design_bandpass(10.0, 5.0, kFs), Error);
}

TEST_CASE("welch bin powers recover tone amplitude") {
  auto x = tone(10.0, 8.0, 30.0, kFs);
  double p = band_power(x, kFs, 8.0, 13.0);
  CHECK(p == doctest::Approx(8.0 * 8.0 / 2.0).epsilon(0.02));
}

TEST_CASE("relative spectral power on constructed signals") {
  // Pure alpha tone.
  auto alpha = tone(10.0, 20.0, 30.0, kFs);
  RspBands r = relative_spectral_power(alpha, kFs);
  CHECK(r.alpha >= 0.95);
  CHECK(r.delta <= 0.03);

  // Equal-power 2 Hz + 10 Hz tones split delta/alpha evenly.
  auto two = tone(2.0, 10.0, 30.0, kFs);
  auto ten = tone(10.0, 10.0, 30.0, kFs, 1.0);
  for (std::size_t i = 0; i < two.size(); ++i) two[i] += ten[i];
  r = relative_spectral_power(two, kFs);
  CHECK(r.delta == doctest::Approx(0.5).epsilon(0.05));
  CHECK(r.alpha == doctest::Approx(0.5).epsilon(0.05));

  // White noise spreads power with the band widths.
  Rng rng(3);
  std::vector<double> noise(static_cast<std::size_t>(60.0 * kFs));
  for (double& v : noise) v = rng.normal();
  r = relative_spectral_power(noise, kFs);
  CHECK(std::abs(r.delta - 3.5 / 27.5) <= 0.05);
  CHECK(std::abs(r.theta - 4.0 / 27.5) <= 0.05);
  CHECK(std::abs(r.alpha - 5.0 / 27.5) <= 0.05);
  CHECK(std::abs(r.beta - 15.0 / 27.5) <= 0.05);
}

TEST_CASE("relative spectral power errors") {
  std::vector<double> zeros(static_cast<std::size_t>(30.0 * kFs), 0.0);
  CHECK_THROWS_AS(relative_spectral_power(zeros, kFs), Error);
  std::vector<double> shorty(static_cast<std::size_t>(2.0 * kFs), 1.0);
  CHECK_THROWS_AS(relative_spectral_power(shorty, kFs), Error);
}

TEST_CASE("epoch spectrogram grid and tone ridge") {
  auto x = tone(10.0, 20.0, 30.0, kFs);
  EpochSpectrogram sg = epoch_spectrogram(x, kFs);
  CHECK(sg.n_time == 29);
  CHECK(sg.n_freq == 64);
  for (std::size_t t = 0; t < sg.n_time; ++t) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < sg.n_freq; ++f)
      if (sg.at(t, f) > sg.at(t, best)) best = f;
    CHECK(sg.freq(best) == doctest::Approx(10.0));
  }
}

TEST_CASE("epoch spectrogram of silence is zero") {
  std::vector<double> x(7500, 0.0);
  EpochSpectrogram sg = epoch_spectrogram(x, kFs);
  for (double v : sg.power) CHECK(v == 0.0);
}

TEST_CASE("chirp ridge is monotone in time") {
  std::vector<double> x(7500);
  // 2 -> 20 Hz linear chirp over 30 s.
  for (std::size_t i = 0; i < x.size(); ++i) {
    double t = static_cast<double>(i) / kFs;
    double f0 = 2.0, k = (20.0 - 2.0) / 30.0;
    x[i] = 20.0 * std::sin(2.0 * M_PI * (f0 * t + 0.5 * k * t * t));
  }
  EpochSpectrogram sg = epoch_spectrogram(x, kFs);
  double prev = 0.0;
  for (std::size_t t = 0; t < sg.n_time; ++t) {
    std::size_t best = 0;
    for (std::size_t f = 1; f < sg.n_freq; ++f)
      if (sg.at(t, f) > sg.at(t, best)) best = f;
    CHECK(sg.freq(best) >= prev - 0.51);  // allow one-bin jitter
    prev = std::max(prev, sg.freq(best));
  }
}

TEST_CASE("spectrogram scales quadratically with input gain") {
  Rng rng(9);
  std::vector<double> x(7500);
  for (double& v : x) v = rng.normal(0.0, 10.0);
  std::vector<double> x3(x);
  for (double& v : x3) v *= 3.0;
  EpochSpectrogram a = epoch_spectrogram(x, kFs);
  EpochSpectrogram b = epoch_spectrogram(x3, kFs);
  for (std::size_t i = 0; i < a.power.size(); ++i) {
    CHECK(b.power[i] >= 0.0);
    CHECK(b.power[i] == doctest::Approx(9.0 * a.power[i]).epsilon(1e-9));
  }
}

TEST_CASE("autocorrelation peaks at the pulse period") {
  double fs = 50.0;
  auto x = tone(1.2, 1.0, 5.0, fs);
  auto r = autocorrelation(x, 100);
  std::size_t lag_lo = 16, lag_hi = 100;
  std::size_t best = lag_lo;
  for (std::size_t l = lag_lo; l <= lag_hi && l < r.size(); ++l)
    if (r[l] > r[best]) best = l;
  CHECK(std::abs(static_cast<double>(best) - fs / 1.2) <= 1.0);
  CHECK(r[best] > 0.9);
}

TEST_CASE("causal filtering is available for the streaming path") {
  auto x = tone(50.0, 10.0, 30.0, kFs);
  PreprocessConfig cfg;
  cfg.mode = FilterMode::Causal;
  auto y = preprocess(x, kFs, cfg);
  // Steady-state suppression still strong, transient at onset allowed.
  std::vector<double> tail(y.begin() + 2500, y.end());
  CHECK(rms(tail) <= 0.05 * rms(x));
}
