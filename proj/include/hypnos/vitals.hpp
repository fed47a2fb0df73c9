#pragma once

#include <array>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "hypnos/quality.hpp"

namespace hypnos {

struct HrEstimate {
  double bpm = 0.0;
  double window_start = 0.0;
  bool quality = false;
};

struct RrEstimate {
  double brpm = 0.0;
  double window_start = 0.0;
};

enum class Posture { Supine, Prone, LeftSide, RightSide, Upright };
const char* posture_name(Posture p);

struct HeartRateConfig {
  double band_lo_hz = 0.5;
  double band_hi_hz = 8.0;
  double min_peak_distance_s = 60.0 / 200.0;  // 200 bpm ceiling
  int smoothing_span = 5;                     // moving average across windows
  PpgQualityConfig quality;
};

// Raw single-window estimate: quality-passing channels are bandpassed,
// z-normalized and averaged; systolic peaks give bpm = 60 / mean interval.
// Returns nullopt when no channel passes quality or fewer than 2 peaks exist.
std::optional<double> hr_from_window(
    const std::array<std::span<const double>, 3>& ppg, double fs,
    const HeartRateConfig& cfg = {});

// Applies the moving average across consecutive 5 s windows.
class HeartRateTracker {
 public:
  explicit HeartRateTracker(HeartRateConfig cfg = {}) : cfg_(cfg) {}

  HrEstimate process(const std::array<std::span<const double>, 3>& ppg,
                     double fs, double window_start);
  void reset() { recent_.clear(); }

 private:
  HeartRateConfig cfg_;
  std::deque<double> recent_;
};

struct RespiratoryConfig {
  double band_lo_hz = 0.1;
  double band_hi_hz = 0.7;
  double min_peak_distance_s = 1.2;  // 50 brpm ceiling
};

// 60 s window of the IMU Y axis: masked samples are linearly interpolated,
// the series bandpassed, and brpm = 60 / median inter-peak duration.
// Throws TooFewBreaths when fewer than 3 peaks are found.
RrEstimate respiratory_rate(std::span<const double> imu_y,
                            const std::vector<bool>& outlier_mask, double fs,
                            double window_start,
                            const RespiratoryConfig& cfg = {});

// Device frame: X toward the right ear, Y toward the top of the head,
// Z out of the forehead. The accelerometer reads +1 g along whichever axis
// points up, so supine gives (0,0,+1).
Posture posture_from_gravity(double gx, double gy, double gz);

struct PostureConfig {
  double hysteresis_deg = 15.0;
};

// Quantizes the mean gravity vector of each >=10 s window with hysteresis:
// the label only switches once the vector moves more than 45 deg + hysteresis
// away from the held label's canonical direction.
class PostureTracker {
 public:
  explicit PostureTracker(PostureConfig cfg = {}) : cfg_(cfg) {}

  Posture update(std::span<const double> ax, std::span<const double> ay,
                 std::span<const double> az, const std::vector<bool>& mask);
  void reset() { held_.reset(); }

 private:
  PostureConfig cfg_;
  std::optional<Posture> held_;
};

}  // namespace hypnos
