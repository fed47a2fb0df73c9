#include "hypnos/vitals.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hypnos/errors.hpp"
#include "hypnos/filters.hpp"

namespace hypnos {

const char* posture_name(Posture p) {
  switch (p) {
    case Posture::Supine: return "supine";
    case Posture::Prone: return "prone";
    case Posture::LeftSide: return "left";
    case Posture::RightSide: return "right";
    case Posture::Upright: return "upright";
  }
  return "?";
}

namespace {

// Local maxima above min_height, at least min_dist samples apart (higher
// peaks win), refined to sub-sample positions by parabolic interpolation.
std::vector<double> detect_peaks(std::span<const double> x, double min_dist,
                                 double min_height) {
  struct Candidate {
    std::size_t idx;
    double amp;
  };
  std::vector<Candidate> cands;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] >= min_height)
      cands.push_back({i, x[i]});
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) {
                     return a.amp > b.amp;
                   });
  std::vector<std::size_t> kept;
  for (const auto& c : cands) {
    bool ok = true;
    for (std::size_t k : kept) {
      if (std::abs(static_cast<double>(c.idx) - static_cast<double>(k)) <
          min_dist) {
        ok = false;
        break;
      }
    }
    if (ok) kept.push_back(c.idx);
  }
  std::sort(kept.begin(), kept.end());

  std::vector<double> refined;
  refined.reserve(kept.size());
  for (std::size_t i : kept) {
    double den = x[i - 1] - 2.0 * x[i] + x[i + 1];
    double shift = den < 0.0 ? 0.5 * (x[i - 1] - x[i + 1]) / den : 0.0;
    refined.push_back(static_cast<double>(i) + std::clamp(shift, -0.5, 0.5));
  }
  return refined;
}

}  // namespace

std::optional<double> hr_from_window(
    const std::array<std::span<const double>, 3>& ppg, double fs,
    const HeartRateConfig& cfg) {
  std::vector<std::vector<double>> clean;
  for (const auto& ch : ppg) {
    if (ch.empty()) continue;
    bool ok = false;
    try {
      ok = ppg_quality(ch, fs, cfg.quality);
    } catch (const Error&) {
      ok = false;
    }
    if (!ok) continue;
    auto filtered =
        filtfilt(design_bandpass(cfg.band_lo_hz,
                                 std::min(cfg.band_hi_hz, fs * 0.45), fs),
                 ch, fs);
    double mean = std::accumulate(filtered.begin(), filtered.end(), 0.0) /
                  static_cast<double>(filtered.size());
    double var = 0.0;
    for (double v : filtered) var += (v - mean) * (v - mean);
    var /= static_cast<double>(filtered.size());
    if (!(var > 0.0)) continue;
    double inv = 1.0 / std::sqrt(var);
    for (double& v : filtered) v = (v - mean) * inv;
    clean.push_back(std::move(filtered));
  }
  if (clean.empty()) return std::nullopt;

  std::vector<double> avg(clean[0].size(), 0.0);
  for (const auto& ch : clean)
    for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += ch[i];
  for (double& v : avg) v /= static_cast<double>(clean.size());

  double peak_level = 0.0;
  for (double v : avg) peak_level = std::max(peak_level, v);
  // Half the systolic height keeps dicrotic bumps out of the peak set.
  auto peaks = detect_peaks(avg, cfg.min_peak_distance_s * fs, 0.5 * peak_level);
  if (peaks.size() < 2) return std::nullopt;
  double mean_interval =
      (peaks.back() - peaks.front()) / static_cast<double>(peaks.size() - 1);
  double bpm = 60.0 * fs / mean_interval;
  if (bpm < 30.0 || bpm > 200.0) return std::nullopt;
  return bpm;
}

HrEstimate HeartRateTracker::process(
    const std::array<std::span<const double>, 3>& ppg, double fs,
    double window_start) {
  HrEstimate est;
  est.window_start = window_start;
  auto raw = hr_from_window(ppg, fs, cfg_);
  if (!raw) {
    est.quality = false;
    return est;
  }
  recent_.push_back(*raw);
  while (recent_.size() > static_cast<std::size_t>(cfg_.smoothing_span))
    recent_.pop_front();
  est.bpm = std::accumulate(recent_.begin(), recent_.end(), 0.0) /
            static_cast<double>(recent_.size());
  est.quality = true;
  return est;
}

RrEstimate respiratory_rate(std::span<const double> imu_y,
                            const std::vector<bool>& outlier_mask, double fs,
                            double window_start,
                            const RespiratoryConfig& cfg) {
  const std::size_t n = imu_y.size();
  if (static_cast<double>(n) < 59.0 * fs)
    raise(ErrorCode::TooShort, "respiratory rate needs a 60 s window");

  // Bridge masked samples by linear interpolation.
  std::vector<double> y(imu_y.begin(), imu_y.end());
  std::size_t i = 0;
  while (i < n) {
    if (i >= outlier_mask.size() || !outlier_mask[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && j < outlier_mask.size() && outlier_mask[j]) ++j;
    double left = i > 0 ? y[i - 1] : (j < n ? y[j] : 0.0);
    double right = j < n ? y[j] : left;
    for (std::size_t k = i; k < j; ++k) {
      double frac = static_cast<double>(k - i + 1) /
                    static_cast<double>(j - i + 1);
      y[k] = left + (right - left) * frac;
    }
    i = j;
  }

  auto filtered = filtfilt(design_bandpass(cfg.band_lo_hz, cfg.band_hi_hz, fs),
                           y, fs);
  auto peaks = detect_peaks(filtered, cfg.min_peak_distance_s * fs, 0.002);
  if (peaks.size() < 3)
    raise(ErrorCode::TooFewBreaths, "fewer than 3 respiratory peaks");

  std::vector<double> intervals(peaks.size() - 1);
  for (std::size_t k = 1; k < peaks.size(); ++k)
    intervals[k - 1] = (peaks[k] - peaks[k - 1]) / fs;
  std::sort(intervals.begin(), intervals.end());
  double median = intervals.size() % 2 == 1
                      ? intervals[intervals.size() / 2]
                      : 0.5 * (intervals[intervals.size() / 2 - 1] +
                               intervals[intervals.size() / 2]);

  RrEstimate est;
  est.window_start = window_start;
  est.brpm = std::clamp(60.0 / median, 4.0, 40.0);
  return est;
}

namespace {

struct Vec3 {
  double x, y, z;
};

Vec3 canonical_direction(Posture p, double y_sign) {
  switch (p) {
    case Posture::Supine: return {0.0, 0.0, 1.0};
    case Posture::Prone: return {0.0, 0.0, -1.0};
    case Posture::LeftSide: return {1.0, 0.0, 0.0};
    case Posture::RightSide: return {-1.0, 0.0, 0.0};
    case Posture::Upright: return {0.0, y_sign >= 0.0 ? 1.0 : -1.0, 0.0};
  }
  return {0.0, 0.0, 1.0};
}

}  // namespace

Posture posture_from_gravity(double gx, double gy, double gz) {
  double axx = std::abs(gx), ayy = std::abs(gy), azz = std::abs(gz);
  if (azz >= axx && azz >= ayy)
    return gz >= 0.0 ? Posture::Supine : Posture::Prone;
  if (axx >= ayy) return gx >= 0.0 ? Posture::LeftSide : Posture::RightSide;
  return Posture::Upright;
}

Posture PostureTracker::update(std::span<const double> ax,
                               std::span<const double> ay,
                               std::span<const double> az,
                               const std::vector<bool>& mask) {
  double sx = 0.0, sy = 0.0, sz = 0.0;
  std::size_t n = 0;
  const std::size_t len = std::min({ax.size(), ay.size(), az.size()});
  for (std::size_t i = 0; i < len; ++i) {
    if (i < mask.size() && mask[i]) continue;
    sx += ax[i];
    sy += ay[i];
    sz += az[i];
    ++n;
  }
  if (n == 0) raise(ErrorCode::AllMasked, "no unmasked IMU samples");
  double norm = std::sqrt(sx * sx + sy * sy + sz * sz);
  if (!(norm > 0.0)) raise(ErrorCode::AllMasked, "zero gravity vector");
  sx /= norm;
  sy /= norm;
  sz /= norm;

  Posture candidate = posture_from_gravity(sx, sy, sz);
  if (!held_) {
    held_ = candidate;
    return *held_;
  }
  if (candidate == *held_) return *held_;

  Vec3 canon = canonical_direction(*held_, sy);
  double cosang = sx * canon.x + sy * canon.y + sz * canon.z;
  double ang_deg = std::acos(std::clamp(cosang, -1.0, 1.0)) * 180.0 / M_PI;
  if (ang_deg > 45.0 + cfg_.hysteresis_deg) held_ = candidate;
  return *held_;
}

}  // namespace hypnos
