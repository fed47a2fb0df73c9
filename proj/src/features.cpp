#include "hypnos/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypnos/errors.hpp"

namespace hypnos {

std::vector<double> preprocess(std::span<const double> series_uv, double fs,
                               const PreprocessConfig& cfg) {
  std::vector<double> y(series_uv.begin(), series_uv.end());
  for (double& v : y) v = std::clamp(v, -cfg.clamp_uv, cfg.clamp_uv);
  std::vector<Biquad> notches;
  for (double f0 : cfg.notch_hz)
    if (f0 < fs / 2.0) notches.push_back(design_notch(f0, fs, cfg.notch_q));
  if (notches.empty()) return y;
  y = apply_filter(notches, y, fs, cfg.mode);
  // Filter overshoot must not break the amplitude contract.
  for (double& v : y) v = std::clamp(v, -cfg.clamp_uv, cfg.clamp_uv);
  return y;
}

ComponentSignals decompose(std::span<const double> series_uv, double fs,
                           const DecomposeConfig& cfg) {
  ComponentSignals c;
  c.eeg = apply_filter(design_bandpass(cfg.eeg_lo, std::min(cfg.eeg_hi, fs * 0.45), fs),
                       series_uv, fs, cfg.mode);
  c.eog = apply_filter(design_bandpass(cfg.eog_lo, cfg.eog_hi, fs), series_uv,
                       fs, cfg.mode);
  c.emg = apply_filter(design_bandpass(cfg.emg_lo, std::min(cfg.emg_hi, fs * 0.45), fs),
                       series_uv, fs, cfg.mode);
  return c;
}

const std::array<const char*, kFeatureCount> kFeatureNames = {
    // EEG
    "eeg_abs_delta", "eeg_abs_theta", "eeg_abs_alpha", "eeg_abs_sigma",
    "eeg_abs_beta", "eeg_rel_delta", "eeg_rel_theta", "eeg_rel_alpha",
    "eeg_rel_sigma", "eeg_rel_beta", "eeg_delta_beta_ratio",
    "eeg_theta_alpha_ratio", "eeg_spectral_edge_95", "eeg_median_freq",
    "eeg_hjorth_activity", "eeg_hjorth_mobility", "eeg_hjorth_complexity",
    "eeg_spectral_entropy", "eeg_kurtosis", "eeg_skewness",
    "eeg_zero_cross_rate", "eeg_peak_to_peak",
    // EOG
    "eog_variance", "eog_max_abs", "eog_zero_cross_rate", "eog_power_0p3_2",
    "eog_power_2_6", "eog_sem_index", "eog_blink_count", "eog_p75_abs",
    // EMG
    "emg_rms", "emg_variance", "emg_abs_power_20_45", "emg_rel_power_20_45",
    "emg_zero_cross_rate", "emg_kurtosis", "emg_p95_abs", "emg_hjorth_mobility"};

int feature_index(const std::string& name) {
  for (int i = 0; i < kFeatureCount; ++i)
    if (name == kFeatureNames[i]) return i;
  raise(ErrorCode::ConfigError, "unknown feature '" + name + "'");
}

namespace {

struct Moments {
  double mean = 0.0, var = 0.0, kurtosis = 0.0, skewness = 0.0;
};

Moments moments(std::span<const double> x) {
  Moments m;
  const double n = static_cast<double>(x.size());
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double v : x) {
    double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.var = m2;
  if (m2 > 0.0) {
    m.kurtosis = m4 / (m2 * m2) - 3.0;
    m.skewness = m3 / std::pow(m2, 1.5);
  }
  return m;
}

double zero_cross_rate(std::span<const double> x, double fs) {
  if (x.size() < 2) return 0.0;
  double mean = std::accumulate(x.begin(), x.end(), 0.0) /
                static_cast<double>(x.size());
  std::size_t crossings = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    double a = x[i - 1] - mean, b = x[i] - mean;
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) ++crossings;
  }
  return static_cast<double>(crossings) * fs / static_cast<double>(x.size());
}

double percentile_abs(std::span<const double> x, double p) {
  if (x.empty()) return 0.0;
  std::vector<double> mag(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) mag[i] = std::abs(x[i]);
  double pos = p * static_cast<double>(mag.size() - 1);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(lo + 1, mag.size() - 1);
  double frac = pos - static_cast<double>(lo);
  std::nth_element(mag.begin(), mag.begin() + static_cast<std::ptrdiff_t>(lo),
                   mag.end());
  double vlo = mag[lo];
  double vhi = vlo;
  if (hi != lo)
    vhi = *std::min_element(mag.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                            mag.end());
  return vlo * (1.0 - frac) + vhi * frac;
}

double diff_variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) d[i - 1] = x[i] - x[i - 1];
  return moments(d).var;
}

double hjorth_mobility(std::span<const double> x) {
  double v = moments(x).var;
  if (!(v > 0.0)) return 0.0;
  return std::sqrt(diff_variance(x) / v);
}

double hjorth_complexity(std::span<const double> x) {
  double mob = hjorth_mobility(x);
  if (!(mob > 0.0)) return 0.0;
  std::vector<double> d(x.size() - 1);
  for (std::size_t i = 1; i < x.size(); ++i) d[i - 1] = x[i] - x[i - 1];
  double mob_d = hjorth_mobility(d);
  return mob_d / mob;
}

double spectral_entropy(const WelchSpectrum& sp) {
  double total = sp.total_power();
  if (!(total > 0.0) || sp.power.size() < 2) return 0.0;
  double h = 0.0;
  for (double p : sp.power) {
    if (p <= 0.0) continue;
    double q = p / total;
    h -= q * std::log(q);
  }
  return h / std::log(static_cast<double>(sp.power.size()));
}

double spectral_edge(const WelchSpectrum& sp, double fraction) {
  double total = sp.total_power();
  if (!(total > 0.0)) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < sp.power.size(); ++i) {
    acc += sp.power[i];
    if (acc >= fraction * total) return sp.freq(i);
  }
  return sp.freq(sp.power.size() - 1);
}

// Threshold crossings of the moving-average-smoothed derivative; a blink or
// saccade produces a sharp slope in the EOG band.
double blink_count(std::span<const double> eog, double fs) {
  const std::size_t w =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(0.25 * fs)));
  if (eog.size() <= w + 1) return 0.0;
  std::vector<double> sm(eog.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < eog.size(); ++i) {
    acc += eog[i];
    if (i >= w) acc -= eog[i - w];
    sm[i] = acc / static_cast<double>(std::min(i + 1, w));
  }
  const double threshold_uv_s = 100.0;
  int count = 0;
  bool above = false;
  for (std::size_t i = 1; i < sm.size(); ++i) {
    double slope = std::abs(sm[i] - sm[i - 1]) * fs;
    if (!above && slope >= threshold_uv_s) {
      ++count;
      above = true;
    } else if (above && slope < threshold_uv_s * 0.5) {
      above = false;
    }
  }
  return static_cast<double>(count);
}

}  // namespace

FeatureVector38 feature_vector_38(const ComponentSignals& c, double fs) {
  return epoch_features(c, fs).fv;
}

EpochFeatures epoch_features(const ComponentSignals& c, double fs) {
  if (c.eeg.empty() || c.eog.empty() || c.emg.empty())
    raise(ErrorCode::TooShort, "components are empty");

  EpochFeatures out{};
  FeatureVector38& f = out.fv;
  int i = 0;

  // --- EEG ---
  WelchSpectrum eeg_sp = welch_spectrum(c.eeg, fs, 2.0, 45.0, 0.0);
  {
    double total = eeg_sp.band_power(0.5, 30.0);
    if (total > 0.0) {
      out.rsp.delta = eeg_sp.band_power(0.5, 4.0) / total;
      out.rsp.theta = eeg_sp.band_power(4.0, 8.0) / total;
      out.rsp.alpha = eeg_sp.band_power(8.0, 13.0) / total;
      out.rsp.beta = eeg_sp.band_power(15.0, 30.0) / total;
    }
  }
  const double eeg_total = eeg_sp.total_power();
  const double abs_delta = eeg_sp.band_power(0.5, 4.0);
  const double abs_theta = eeg_sp.band_power(4.0, 8.0);
  const double abs_alpha = eeg_sp.band_power(8.0, 13.0);
  const double abs_sigma = eeg_sp.band_power(12.0, 15.0);
  const double abs_beta = eeg_sp.band_power(15.0, 30.0);
  f[i++] = abs_delta;
  f[i++] = abs_theta;
  f[i++] = abs_alpha;
  f[i++] = abs_sigma;
  f[i++] = abs_beta;
  f[i++] = eeg_total > 0.0 ? abs_delta / eeg_total : 0.0;
  f[i++] = eeg_total > 0.0 ? abs_theta / eeg_total : 0.0;
  f[i++] = eeg_total > 0.0 ? abs_alpha / eeg_total : 0.0;
  f[i++] = eeg_total > 0.0 ? abs_sigma / eeg_total : 0.0;
  f[i++] = eeg_total > 0.0 ? abs_beta / eeg_total : 0.0;
  f[i++] = abs_beta > 0.0 ? abs_delta / abs_beta : 0.0;
  f[i++] = abs_alpha > 0.0 ? abs_theta / abs_alpha : 0.0;
  f[i++] = spectral_edge(eeg_sp, 0.95);
  f[i++] = spectral_edge(eeg_sp, 0.50);
  Moments em = moments(c.eeg);
  f[i++] = em.var;  // Hjorth activity doubles as total time-domain power
  f[i++] = hjorth_mobility(c.eeg);
  f[i++] = hjorth_complexity(c.eeg);
  f[i++] = spectral_entropy(eeg_sp);
  f[i++] = em.kurtosis;
  f[i++] = em.skewness;
  f[i++] = zero_cross_rate(c.eeg, fs);
  f[i++] = c.eeg.empty() ? 0.0
                         : *std::max_element(c.eeg.begin(), c.eeg.end()) -
                               *std::min_element(c.eeg.begin(), c.eeg.end());

  // --- EOG ---
  WelchSpectrum eog_sp = welch_spectrum(c.eog, fs, 2.0, 12.0, 0.0);
  Moments om = moments(c.eog);
  double eog_slow = eog_sp.band_power(0.3, 1.0);
  double eog_all = eog_sp.band_power(0.3, 10.0);
  f[i++] = om.var;
  f[i++] = percentile_abs(c.eog, 1.0);
  f[i++] = zero_cross_rate(c.eog, fs);
  f[i++] = eog_sp.band_power(0.3, 2.0);
  f[i++] = eog_sp.band_power(2.0, 6.0);
  f[i++] = eog_all > 0.0 ? eog_slow / eog_all : 0.0;
  f[i++] = blink_count(c.eog, fs);
  f[i++] = percentile_abs(c.eog, 0.75);

  // --- EMG ---
  WelchSpectrum emg_sp = welch_spectrum(c.emg, fs, 2.0, 48.0, 0.0, 19.5);
  Moments mm = moments(c.emg);
  double emg_total = emg_sp.total_power();
  double emg_band = emg_sp.band_power(20.0, 45.0);
  double emg_sq = 0.0;
  for (double v : c.emg) emg_sq += v * v;
  f[i++] = std::sqrt(emg_sq / static_cast<double>(c.emg.size()));
  f[i++] = mm.var;
  f[i++] = emg_band;
  f[i++] = emg_total > 0.0 ? emg_band / emg_total : 0.0;
  f[i++] = zero_cross_rate(c.emg, fs);
  f[i++] = mm.kurtosis;
  f[i++] = percentile_abs(c.emg, 0.95);
  f[i++] = hjorth_mobility(c.emg);

  return out;
}

}  // namespace hypnos
