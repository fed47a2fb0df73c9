#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hypnos/hypnogram.hpp"
#include "hypnos/recording.hpp"
#include "hypnos/vitals.hpp"

namespace hypnos {

struct ArtifactSpan {
  std::string kind;  // flatline | saturation | line_noise | movement
  double t0_s = 0.0;
  double t1_s = 0.0;
  std::vector<int> channels;  // ExG channel indices; empty = all six
  double magnitude = 0.0;     // line_noise amplitude in uV
};

struct MovementSpan {
  double t0_s = 0.0;
  double t1_s = 0.0;
};

// Deterministic session blueprint. Stage fractions apply to the post-onset
// part of the night; the remainder is within-sleep Wake.
struct SessionSpec {
  std::uint64_t seed = 1;
  std::size_t n_epochs = 960;
  std::size_t sol_epoch = 40;
  double light_frac = 0.55;
  double deep_frac = 0.20;
  double rem_frac = 0.225;

  double fs_exg = 250.0;
  double fs_ppg = 50.0;
  double fs_imu = 50.0;

  bool stage_modulated_vitals = true;
  std::optional<double> hr_const_bpm;
  std::optional<double> rr_const_brpm;
  std::vector<std::pair<std::size_t, Posture>> posture_schedule;  // epoch -> posture
  double movement_rate_per_wake_epoch = 0.3;

  std::vector<ArtifactSpan> artifacts;

  void validate() const;  // throws InfeasibleProportions
};

// Ground truth emitted with every generated session.
struct SessionTruth {
  std::uint64_t seed = 0;
  Hypnogram hypnogram;
  std::optional<std::size_t> sol_epoch;
  std::vector<double> hr_bpm_per_5s;
  std::vector<double> rr_brpm_per_60s;
  std::vector<std::pair<std::size_t, Posture>> posture_changes;
  std::vector<MovementSpan> movements;
  std::vector<ArtifactSpan> artifacts;
};

struct SyntheticSession {
  SessionRecording recording;
  SessionTruth truth;
};

// Wake until the planted onset, then a quota-guided stage chain whose
// empirical frequencies track the spec fractions; same seed, same output.
Hypnogram gen_hypnogram(const SessionSpec& spec);

// Stage-faithful six-channel ExG: alpha bursts and EMG tone in Wake, spindle
// bursts and K-complexes in Light, high-amplitude slow delta in Deep, theta
// with saccades and low EMG in REM.
std::array<std::vector<double>, kNumExgChannels> gen_exg(const Hypnogram& h,
                                                         std::uint64_t seed,
                                                         double fs);

// Full session: ExG + PPG pulse train + IMU with breathing ripple, posture
// schedule and movement bursts, plus the truth sidecar. Artifacts from the
// spec are injected and labeled.
SyntheticSession generate_session(const SessionSpec& spec);

// Applies one labeled artifact to the recording in place.
void inject_artifact(SessionRecording& rec, const ArtifactSpan& span);

Posture posture_from_name(const std::string& name);

std::string truth_to_json(const SessionTruth& t);
SessionTruth truth_from_json(const std::string& text);
void write_truth(const std::filesystem::path& path, const SessionTruth& t);
SessionTruth read_truth(const std::filesystem::path& path);

}  // namespace hypnos
