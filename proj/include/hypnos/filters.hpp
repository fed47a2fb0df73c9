#pragma once

#include <span>
#include <vector>

namespace hypnos {

// Direct-form-II-transposed biquad section, coefficients normalized to a0=1.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;

  double magnitude_at(double freq_hz, double fs) const;
};

// Running state for causal (streaming) application of one section.
struct BiquadState {
  double z1 = 0.0, z2 = 0.0;

  double step(const Biquad& q, double x) {
    double y = q.b0 * x + z1;
    z1 = q.b1 * x - q.a1 * y + z2;
    z2 = q.b2 * x - q.a2 * y;
    return y;
  }
};

// 2nd-order Butterworth designs (bilinear transform).
Biquad design_lowpass(double fc, double fs);
Biquad design_highpass(double fc, double fs);
// RBJ notch; bandwidth = f0 / q.
Biquad design_notch(double f0, double fs, double q);

// 4th-order Butterworth bandpass as a highpass+lowpass cascade.
std::vector<Biquad> design_bandpass(double flo, double fhi, double fs);

enum class FilterMode { ZeroPhase, Causal };

// Applies the cascade causally with zero initial state.
std::vector<double> filter_causal(const std::vector<Biquad>& sections,
                                  std::span<const double> x);

// Zero-phase forward-backward application. Each pass treats the window as
// circular (a discarded warm-up lap converges the state), which leaves
// on-grid periodic content free of edge transients.
std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                             std::span<const double> x, double fs);

std::vector<double> apply_filter(const std::vector<Biquad>& sections,
                                 std::span<const double> x, double fs,
                                 FilterMode mode);

}  // namespace hypnos
