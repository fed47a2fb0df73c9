#include "hypnos/filters.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "hypnos/errors.hpp"

namespace hypnos {

double Biquad::magnitude_at(double freq_hz, double fs) const {
  const double w = 2.0 * M_PI * freq_hz / fs;
  const std::complex<double> z = std::polar(1.0, -w);
  const std::complex<double> num = b0 + b1 * z + b2 * z * z;
  const std::complex<double> den = 1.0 + a1 * z + a2 * z * z;
  return std::abs(num / den);
}

Biquad design_lowpass(double fc, double fs) {
  if (!(fc > 0.0) || !(fc < fs / 2.0))
    raise(ErrorCode::ConfigError, "lowpass cutoff out of range");
  const double k = std::tan(M_PI * fc / fs);
  const double norm = 1.0 / (1.0 + std::sqrt(2.0) * k + k * k);
  Biquad q;
  q.b0 = k * k * norm;
  q.b1 = 2.0 * q.b0;
  q.b2 = q.b0;
  q.a1 = 2.0 * (k * k - 1.0) * norm;
  q.a2 = (1.0 - std::sqrt(2.0) * k + k * k) * norm;
  return q;
}

Biquad design_highpass(double fc, double fs) {
  if (!(fc > 0.0) || !(fc < fs / 2.0))
    raise(ErrorCode::ConfigError, "highpass cutoff out of range");
  const double k = std::tan(M_PI * fc / fs);
  const double norm = 1.0 / (1.0 + std::sqrt(2.0) * k + k * k);
  Biquad q;
  q.b0 = norm;
  q.b1 = -2.0 * norm;
  q.b2 = norm;
  q.a1 = 2.0 * (k * k - 1.0) * norm;
  q.a2 = (1.0 - std::sqrt(2.0) * k + k * k) * norm;
  return q;
}

Biquad design_notch(double f0, double fs, double q_factor) {
  if (!(f0 > 0.0) || !(f0 < fs / 2.0))
    raise(ErrorCode::ConfigError, "notch frequency out of range");
  const double w0 = 2.0 * M_PI * f0 / fs;
  const double alpha = std::sin(w0) / (2.0 * q_factor);
  const double a0 = 1.0 + alpha;
  Biquad q;
  q.b0 = 1.0 / a0;
  q.b1 = -2.0 * std::cos(w0) / a0;
  q.b2 = 1.0 / a0;
  q.a1 = -2.0 * std::cos(w0) / a0;
  q.a2 = (1.0 - alpha) / a0;
  return q;
}

std::vector<Biquad> design_bandpass(double flo, double fhi, double fs) {
  if (!(flo > 0.0) || !(flo < fhi) || !(fhi < fs / 2.0))
    raise(ErrorCode::ConfigError, "bandpass corners out of range");
  return {design_highpass(flo, fs), design_lowpass(fhi, fs)};
}

std::vector<double> filter_causal(const std::vector<Biquad>& sections,
                                  std::span<const double> x) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sections) {
    BiquadState st;
    for (double& v : y) v = st.step(q, v);
  }
  return y;
}

namespace {

// One circular pass: a full warm-up lap converges the section state to the
// periodic steady state, then the recorded lap filters in place. Narrowband
// sections see no edge transient on any signal that is periodic over the
// window (every on-grid tone is), which reflection padding cannot achieve.
void filter_circular(const Biquad& q, std::vector<double>& y) {
  if (y.empty()) return;
  BiquadState st;
  for (double v : y) st.step(q, v);
  for (double& v : y) v = st.step(q, v);
}

}  // namespace

std::vector<double> filtfilt(const std::vector<Biquad>& sections,
                             std::span<const double> x, double /*fs*/) {
  std::vector<double> y(x.begin(), x.end());
  for (const Biquad& q : sections) {
    filter_circular(q, y);
    std::reverse(y.begin(), y.end());
    filter_circular(q, y);
    std::reverse(y.begin(), y.end());
  }
  return y;
}

std::vector<double> apply_filter(const std::vector<Biquad>& sections,
                                 std::span<const double> x, double fs,
                                 FilterMode mode) {
  return mode == FilterMode::ZeroPhase ? filtfilt(sections, x, fs)
                                       : filter_causal(sections, x);
}

}  // namespace hypnos
