#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hypnos {

// Welch power spectral estimate: Hann-windowed, mean-removed segments with
// 50% overlap. Bin values are one-sided band powers (units^2), scaled so that
// the sum over all bins approximates the signal variance.
struct WelchSpectrum {
  double f0 = 0.0;  // frequency of bin 0
  double df = 0.0;  // bin spacing
  std::vector<double> power;

  double freq(std::size_t i) const { return f0 + df * static_cast<double>(i); }
  // Sum of bins with flo <= f < fhi.
  double band_power(double flo, double fhi) const;
  double total_power() const;
};

// segment_s defaults to 2 s (0.5 Hz bins); shorter inputs fall back to a
// single full-length segment. fmax_hz < 0 means up to Nyquist; overlap is
// the segment overlap fraction.
WelchSpectrum welch_spectrum(std::span<const double> x, double fs,
                             double segment_s = 2.0, double fmax_hz = -1.0,
                             double overlap = 0.5, double fmin_hz = 0.0);

// Convenience wrapper: Welch band power over [flo, fhi).
double band_power(std::span<const double> x, double fs, double flo, double fhi);

// Time-frequency power grid for one 30 s epoch: Hann-windowed 2 s windows at
// 50% overlap (29 time bins), frequencies 0.5..32 Hz in 0.5 Hz steps (64 bins).
struct EpochSpectrogram {
  std::size_t n_time = 0;
  std::size_t n_freq = 0;
  double f0 = 0.5;
  double df = 0.5;
  double window_s = 2.0;
  std::vector<double> power;  // row-major [time][freq]

  double at(std::size_t t, std::size_t f) const { return power[t * n_freq + f]; }
  double& at(std::size_t t, std::size_t f) { return power[t * n_freq + f]; }
  double freq(std::size_t f) const { return f0 + df * static_cast<double>(f); }
};

struct SpectrogramConfig {
  double window_s = 2.0;
  double overlap = 0.5;
  double fmin = 0.5;
  double fmax = 32.0;
  double df = 0.5;
};

EpochSpectrogram epoch_spectrogram(std::span<const double> eeg, double fs,
                                   const SpectrogramConfig& cfg = {});

// Relative spectral power of the four staging bands over total 0.5-30 Hz
// power: delta [0.5,4), theta [4,8), alpha [8,13), beta [15,30).
struct RspBands {
  double delta = 0.0, theta = 0.0, alpha = 0.0, beta = 0.0;
};

RspBands relative_spectral_power(std::span<const double> eeg, double fs);

// Normalized autocorrelation at integer lags [0, max_lag].
std::vector<double> autocorrelation(std::span<const double> x, std::size_t max_lag);

}  // namespace hypnos
