#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hypnos/features.hpp"
#include "hypnos/spectral.hpp"
#include "hypnos/stage.hpp"

namespace hypnos {

// ---------------------------------------------------------------------------
// Tensor container: a plain-text file of named, shaped tensors.
// ---------------------------------------------------------------------------

struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  std::size_t numel() const;
};

using TensorMap = std::map<std::string, Tensor>;

std::string tensors_to_text(const TensorMap& tensors);
TensorMap tensors_from_text(const std::string& text);
void write_tensors(const std::filesystem::path& path, const TensorMap& t);
TensorMap read_tensors(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Primary model: 2-layer conv subnetwork on the spectrogram (stride 2, ReLU,
// adaptive 5x5 average pool) + GRU over the 8-epoch feature history, latent
// concatenation of exactly 928, dense head to 4 logits, softmax.
// ---------------------------------------------------------------------------

inline constexpr std::size_t kPmlLatentDim = 928;
inline constexpr std::size_t kHistoryLen = 8;
inline constexpr std::size_t kPmlPoolGrid = 5;

struct PmlWeights {
  Tensor conv1_w, conv1_b;  // [C1,1,k,k], [C1]
  Tensor conv2_w, conv2_b;  // [C2,C1,k,k], [C2]
  Tensor gru_w_ih, gru_w_hh, gru_b_ih, gru_b_hh;  // [3H,38],[3H,H],[3H],[3H]
  Tensor head_w, head_b;    // [4,928], [4]

  std::size_t conv_out_channels() const { return conv2_w.shape[0]; }
  std::size_t hidden_dim() const { return gru_w_hh.shape[1]; }
  std::size_t latent_dim() const;

  // Throws ShapeMismatch unless all shapes are consistent and latent == 928.
  void validate() const;

  static PmlWeights from_tensors(const TensorMap& t);
  TensorMap to_tensors() const;
  static PmlWeights load(const std::filesystem::path& path);

  // Default architecture (conv 16/32 channels, GRU hidden 128) filled with
  // zeros or with seeded uniform noise.
  static PmlWeights zeros();
  static PmlWeights seeded(std::uint64_t seed);
};

// Ring buffer of the current + 7 previous feature vectors; before 8 epochs
// exist the earliest available vector is repeated.
class FeatureHistory {
 public:
  void push(const FeatureVector38& v);
  bool empty() const { return entries_.empty(); }
  // Oldest-to-newest, always kHistoryLen entries.
  std::array<FeatureVector38, kHistoryLen> padded() const;

 private:
  std::vector<FeatureVector38> entries_;  // at most kHistoryLen
};

StageDistribution pml_forward(const EpochSpectrogram& spec,
                              const FeatureHistory& history,
                              const PmlWeights& w);

// ---------------------------------------------------------------------------
// Baseline rule scorer (default when no trained weights are available):
// Wake from alpha dominance and high EMG tone, Deep from delta dominance,
// REM from theta dominance with low EMG and dense eye movement, Light is the
// residual; scores go through a softmax.
// ---------------------------------------------------------------------------

struct BaselineParams {
  double w_alpha = 3.0;
  double alpha_offset = 0.20;
  double w_emg_wake = 1.2;
  double w_delta = 3.2;
  double delta_offset = 0.30;
  double w_theta = 2.6;
  double theta_offset = 0.22;
  double w_emg_rem = 1.0;
  double w_eog_rem = 0.3;
  double emg_mid_uv = 5.0;
  double emg_scale_uv = 1.5;
  double eog_mid_count = 200.0;
  double eog_scale_count = 60.0;
  double temperature = 0.6;
};

StageDistribution baseline_stage(const RspBands& rsp, const FeatureVector38& fv,
                                 const BaselineParams& p = {});

// Arithmetic mean of per-channel distributions. Throws EmptyEnsemble.
StageDistribution ensemble(std::span<const StageDistribution> dists);

// ---------------------------------------------------------------------------
// Secondary model: 24 features from HR/RR/movement over a 60 s window.
// ---------------------------------------------------------------------------

inline constexpr int kSmlFeatureCount = 24;
extern const std::array<const char*, kSmlFeatureCount> kSmlFeatureNames;

struct SmlFeatures {
  std::array<double, kSmlFeatureCount> v{};
};

// Raw material for one 60 s window, assembled by the caller.
struct SmlWindow {
  std::vector<double> hr_bpm;          // per-5s HR estimates inside the window
  std::vector<double> hr_trailing;     // trailing ~5 min of HR estimates
  std::vector<double> rr_brpm;         // trailing RR estimates (newest last)
  std::span<const double> imu_x, imu_y, imu_z;  // 60 s of IMU samples
  std::vector<bool> imu_mask;          // outlier mask for the window
  double fs_imu = 50.0;
  int posture_changes = 0;
  double minutes_since_major_move = 0.0;
  double epoch_index_norm = 0.0;
  std::vector<double> activity_trailing;  // trailing per-5s outlier counts
};

SmlFeatures sml_features(const SmlWindow& w);

struct SmlWeights {
  Tensor gru_w_ih, gru_w_hh, gru_b_ih, gru_b_hh;  // [3H,24],[3H,H],[3H],[3H]
  Tensor head_w, head_b;                          // [4,H],[4]

  std::size_t hidden_dim() const { return gru_w_hh.shape[1]; }
  void validate() const;
  static SmlWeights from_tensors(const TensorMap& t);
  TensorMap to_tensors() const;
  static SmlWeights load(const std::filesystem::path& path);
  static SmlWeights zeros();
  static SmlWeights seeded(std::uint64_t seed);
};

// One GRU step over the feature vector with persistent hidden state, dense
// head, softmax. The caller owns `hidden` (size = hidden_dim, zero-init).
StageDistribution sml_forward(const SmlFeatures& f, const SmlWeights& w,
                              std::vector<double>& hidden);

// Rule scorer over SML features, used when no trained SML weights exist:
// movement and elevated HR vote Wake, low HR votes Deep, mid-high HR with a
// still body and variable breathing votes REM, Light is the residual floor.
struct SmlBaselineParams {
  double w_move = 2.2;
  double w_hr_wake = 0.9;
  double hr_wake_mid = 67.0;
  double hr_wake_scale = 2.5;
  double w_deep = 1.4;
  double hr_deep_mid = 58.5;
  double hr_deep_scale = 1.8;
  double w_rem = 1.1;
  double hr_rem_lo = 64.5;
  double hr_rem_hi = 70.5;
  double hr_rem_scale = 1.8;
  double w_rem_rr = 0.35;
  double rr_std_mid = 0.5;
  double rr_std_scale = 0.3;
  double light_floor = 0.28;
  double activity_ref = 10.0;
  double temperature = 3.0;
};

StageDistribution baseline_sml_stage(const SmlFeatures& f,
                                     const SmlBaselineParams& p = {});

}  // namespace hypnos
