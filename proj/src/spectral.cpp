#include "hypnos/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypnos/errors.hpp"

namespace hypnos {

namespace {

// Runs up to four Goertzel recursions in one pass over the buffer; the
// independent chains hide the per-sample multiply-add latency.
void goertzel_power4(std::span<const double> x, const double* w, int m,
                     double* out) {
  double coeff[4] = {0, 0, 0, 0};
  double s1[4] = {0, 0, 0, 0};
  double s2[4] = {0, 0, 0, 0};
  for (int j = 0; j < m; ++j) coeff[j] = 2.0 * std::cos(w[j]);
  const double* p = x.data();
  const double* end = p + x.size();
  if (m == 4) {
    double c0 = coeff[0], c1 = coeff[1], c2 = coeff[2], c3 = coeff[3];
    double a0 = 0, a1 = 0, a2 = 0, a3 = 0, b0 = 0, b1 = 0, b2 = 0, b3 = 0;
    for (; p < end; ++p) {
      double v = *p;
      double t0 = v + c0 * a0 - b0;
      double t1 = v + c1 * a1 - b1;
      double t2 = v + c2 * a2 - b2;
      double t3 = v + c3 * a3 - b3;
      b0 = a0; b1 = a1; b2 = a2; b3 = a3;
      a0 = t0; a1 = t1; a2 = t2; a3 = t3;
    }
    s1[0] = a0; s1[1] = a1; s1[2] = a2; s1[3] = a3;
    s2[0] = b0; s2[1] = b1; s2[2] = b2; s2[3] = b3;
  } else {
    for (; p < end; ++p) {
      double v = *p;
      for (int j = 0; j < m; ++j) {
        double t = v + coeff[j] * s1[j] - s2[j];
        s2[j] = s1[j];
        s1[j] = t;
      }
    }
  }
  for (int j = 0; j < m; ++j)
    out[j] = s1[j] * s1[j] + s2[j] * s2[j] - coeff[j] * s1[j] * s2[j];
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  return w;
}

}  // namespace

double WelchSpectrum::band_power(double flo, double fhi) const {
  double total = 0.0;
  for (std::size_t i = 0; i < power.size(); ++i) {
    double f = freq(i);
    if (f >= flo - 1e-9 && f < fhi - 1e-9) total += power[i];
  }
  return total;
}

double WelchSpectrum::total_power() const {
  return std::accumulate(power.begin(), power.end(), 0.0);
}

WelchSpectrum welch_spectrum(std::span<const double> x, double fs,
                             double segment_s, double fmax_hz, double overlap,
                             double fmin_hz) {
  if (x.size() < 2) raise(ErrorCode::TooShort, "welch needs >= 2 samples");
  std::size_t seg =
      static_cast<std::size_t>(std::lround(segment_s * fs));
  seg = std::min(seg, x.size());
  if (seg < 2) seg = x.size();
  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(
             static_cast<double>(seg) * (1.0 - std::clamp(overlap, 0.0, 0.9)))));

  const std::vector<double> win = hann_window(seg);
  const double w2 = std::inner_product(win.begin(), win.end(), win.begin(), 0.0);
  const double df = fs / static_cast<double>(seg);
  std::size_t k_hi = seg / 2;
  if (fmax_hz >= 0.0)
    k_hi = std::min(k_hi, static_cast<std::size_t>(std::floor(fmax_hz / df)));
  const std::size_t k_lo = fmin_hz > 0.0
      ? std::min(k_hi, static_cast<std::size_t>(std::ceil(fmin_hz / df)))
      : 0;
  const std::size_t n_bins = k_hi - k_lo + 1;

  WelchSpectrum out;
  out.f0 = static_cast<double>(k_lo) * df;
  out.df = df;
  out.power.assign(n_bins, 0.0);

  std::vector<double> buf(seg);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += x[start + i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i)
      buf[i] = (x[start + i] - mean) * win[i];
    for (std::size_t k = k_lo; k <= k_hi; k += 4) {
      int m = static_cast<int>(std::min<std::size_t>(4, k_hi - k + 1));
      double w[4], p[4];
      for (int j = 0; j < m; ++j)
        w[j] = 2.0 * M_PI * static_cast<double>(k + static_cast<std::size_t>(j)) /
               static_cast<double>(seg);
      goertzel_power4(buf, w, m, p);
      for (int j = 0; j < m; ++j) {
        std::size_t kk = k + static_cast<std::size_t>(j);
        double scale = (kk == 0 || (seg % 2 == 0 && kk == seg / 2)) ? 1.0 : 2.0;
        out.power[kk - k_lo] += scale * p[j] / (static_cast<double>(seg) * w2);
      }
    }
    ++n_segments;
  }
  if (n_segments == 0) raise(ErrorCode::TooShort, "no full welch segment");
  for (double& p : out.power) p /= static_cast<double>(n_segments);
  return out;
}

double band_power(std::span<const double> x, double fs, double flo, double fhi) {
  return welch_spectrum(x, fs).band_power(flo, fhi);
}

EpochSpectrogram epoch_spectrogram(std::span<const double> eeg, double fs,
                                   const SpectrogramConfig& cfg) {
  const std::size_t seg =
      static_cast<std::size_t>(std::lround(cfg.window_s * fs));
  if (eeg.size() < seg)
    raise(ErrorCode::TooShort, "epoch shorter than one spectrogram window");
  const std::size_t hop = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(cfg.window_s * (1.0 - cfg.overlap) * fs)));
  const std::size_t n_time = (eeg.size() - seg) / hop + 1;
  const std::size_t n_freq =
      static_cast<std::size_t>(std::lround((cfg.fmax - cfg.fmin) / cfg.df)) + 1;

  const std::vector<double> win = hann_window(seg);
  const double w2 = std::inner_product(win.begin(), win.end(), win.begin(), 0.0);

  EpochSpectrogram sg;
  sg.n_time = n_time;
  sg.n_freq = n_freq;
  sg.f0 = cfg.fmin;
  sg.df = cfg.df;
  sg.window_s = cfg.window_s;
  sg.power.assign(n_time * n_freq, 0.0);

  std::vector<double> buf(seg);
  for (std::size_t t = 0; t < n_time; ++t) {
    const std::size_t start = t * hop;
    double mean = 0.0;
    for (std::size_t i = 0; i < seg; ++i) mean += eeg[start + i];
    mean /= static_cast<double>(seg);
    for (std::size_t i = 0; i < seg; ++i)
      buf[i] = (eeg[start + i] - mean) * win[i];
    for (std::size_t f = 0; f < n_freq; f += 4) {
      int m = static_cast<int>(std::min<std::size_t>(4, n_freq - f));
      double w[4], p[4];
      for (int j = 0; j < m; ++j)
        w[j] = 2.0 * M_PI * sg.freq(f + static_cast<std::size_t>(j)) / fs;
      goertzel_power4(buf, w, m, p);
      for (int j = 0; j < m; ++j)
        sg.at(t, f + static_cast<std::size_t>(j)) =
            2.0 * p[j] / (static_cast<double>(seg) * w2);
    }
  }
  return sg;
}

RspBands relative_spectral_power(std::span<const double> eeg, double fs) {
  if (static_cast<double>(eeg.size()) < 4.0 * fs)
    raise(ErrorCode::TooShort, "relative spectral power needs >= 4 s");
  WelchSpectrum sp = welch_spectrum(eeg, fs, 2.0, 30.5, 0.0);
  const double total = sp.band_power(0.5, 30.0);
  if (!(total > 0.0))
    raise(ErrorCode::ZeroPower, "no spectral power in 0.5-30 Hz");
  RspBands r;
  r.delta = sp.band_power(0.5, 4.0) / total;
  r.theta = sp.band_power(4.0, 8.0) / total;
  r.alpha = sp.band_power(8.0, 13.0) / total;
  r.beta = sp.band_power(15.0, 30.0) / total;
  return r;
}

std::vector<double> autocorrelation(std::span<const double> x,
                                    std::size_t max_lag) {
  const std::size_t n = x.size();
  std::vector<double> r(max_lag + 1, 0.0);
  if (n == 0) return r;
  double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double v : x) var += (v - mean) * (v - mean);
  if (!(var > 0.0)) return r;
  for (std::size_t lag = 0; lag <= max_lag && lag < n; ++lag) {
    double acc = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
      acc += (x[i] - mean) * (x[i + lag] - mean);
    // Unbiased normalization keeps tone autocorrelation near unit peaks.
    double pairs = static_cast<double>(n - lag);
    r[lag] = acc / (var * pairs / static_cast<double>(n));
  }
  return r;
}

}  // namespace hypnos
