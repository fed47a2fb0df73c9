#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hypnos/recording.hpp"

namespace hypnos {

// Summary quality features for one ExG channel over one epoch.
struct QualityFeatures {
  double flatline_fraction = 0.0;  // samples inside identical runs >= fs/10
  double clip_fraction = 0.0;      // |x| >= 490 uV
  double line_noise_ratio = 0.0;   // power in 50+-1 and 60+-1 Hz over total
  double rms_uv = 0.0;             // AC RMS
  double hf_rms_uv = 0.0;          // RMS above 40 Hz
  double kurtosis = 0.0;           // excess kurtosis, 0 for flat signals

  double by_index(int i) const;
};

inline constexpr int kNumQualityFeatures = 6;
extern const std::array<const char*, kNumQualityFeatures> kQualityFeatureNames;
int quality_feature_index(const std::string& name);

QualityFeatures exg_quality_features(std::span<const double> epoch_uv, double fs);

// Binary decision tree over quality features. Left branch is taken when
// feature <= threshold. Nodes are stored in a vector; node 0 is the root.
struct QualityTree {
  struct Node {
    int feature = -1;      // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    int verdict = -1;      // leaves: 1 scorable, 0 unscorable
  };
  std::vector<Node> nodes;

  static QualityTree default_tree();
  void validate() const;  // throws MalformedTree

  std::string to_json() const;
  static QualityTree from_json(const std::string& text);
};

void write_quality_tree(const std::filesystem::path& path, const QualityTree& t);
QualityTree read_quality_tree(const std::filesystem::path& path);

bool classify_channel(const QualityFeatures& f, const QualityTree& tree);

using ChannelMask = std::array<bool, kNumExgChannels>;

ChannelMask select_channels(const EpochView& epoch, const QualityTree& tree);

inline int mask_count(const ChannelMask& m) {
  int n = 0;
  for (bool b : m) n += b ? 1 : 0;
  return n;
}

struct PpgQualityConfig {
  double min_ac_amplitude = 1.0;     // peak-to-peak, device units
  double max_ac_amplitude = 20000.0;
  double saturation_level = 32000.0; // |x| at or beyond counts as saturated
  double min_autocorr_peak = 0.3;
  double pulse_band_lo_hz = 0.5;
  double pulse_band_hi_hz = 3.0;
};

// True iff the 5 s PPG window has plausible pulsatile content.
bool ppg_quality(std::span<const double> window, double fs,
                 const PpgQualityConfig& cfg = {});

struct ImuOutlierConfig {
  double gravity_tolerance_g = 0.5;  // ||a|| - 1g beyond this flags a sample
  double jerk_threshold_g = 0.5;     // sample-to-sample step for glitch spikes
};

// Per-sample outlier mask; flagged samples are excluded downstream.
std::vector<bool> imu_outlier_mask(std::span<const double> ax,
                                   std::span<const double> ay,
                                   std::span<const double> az,
                                   const ImuOutlierConfig& cfg = {});

}  // namespace hypnos
