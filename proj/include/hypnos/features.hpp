#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "hypnos/filters.hpp"
#include "hypnos/spectral.hpp"

namespace hypnos {

struct PreprocessConfig {
  double clamp_uv = 500.0;
  double notch_q = 30.0;
  std::array<double, 2> notch_hz{50.0, 60.0};
  FilterMode mode = FilterMode::ZeroPhase;
};

// Clamp to +-500 uV, then notch out both mains frequencies.
std::vector<double> preprocess(std::span<const double> series_uv, double fs,
                               const PreprocessConfig& cfg = {});

struct DecomposeConfig {
  double eeg_lo = 0.5, eeg_hi = 35.0;
  double eog_lo = 0.3, eog_hi = 10.0;
  double emg_lo = 20.0, emg_hi = 45.0;
  FilterMode mode = FilterMode::ZeroPhase;
};

// Surrogate EEG / EOG / EMG components of one referenced derivation.
struct ComponentSignals {
  std::vector<double> eeg, eog, emg;
};

ComponentSignals decompose(std::span<const double> series_uv, double fs,
                           const DecomposeConfig& cfg = {});

inline constexpr int kFeatureCount = 38;
using FeatureVector38 = std::array<double, kFeatureCount>;

// Published feature order: 22 EEG, 8 EOG, 8 EMG entries.
extern const std::array<const char*, kFeatureCount> kFeatureNames;
int feature_index(const std::string& name);

// Time/frequency summary of one epoch's components, in the documented order.
FeatureVector38 feature_vector_38(const ComponentSignals& c, double fs);

// Computes the feature vector and the RSP bands from one pass over the
// component spectra (the pipeline's per-derivation hot path).
struct EpochFeatures {
  FeatureVector38 fv;
  RspBands rsp;
};
EpochFeatures epoch_features(const ComponentSignals& c, double fs);

}  // namespace hypnos
