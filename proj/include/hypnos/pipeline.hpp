#pragma once

#include <deque>
#include <map>
#include <optional>
#include <vector>

#include "hypnos/control.hpp"
#include "hypnos/features.hpp"
#include "hypnos/hypnogram.hpp"
#include "hypnos/quality.hpp"
#include "hypnos/recording.hpp"
#include "hypnos/referencing.hpp"
#include "hypnos/staging.hpp"
#include "hypnos/vitals.hpp"

namespace hypnos {

enum class ScorerKind { Baseline, Pml };
enum class SmlScorerKind { Baseline, Net };
enum class StageSource { Pml, Sml, None };
const char* source_name(StageSource s);

struct PipelineConfig {
  ReferencingScheme scheme = ReferencingScheme::Dynamic;
  ScorerKind scorer = ScorerKind::Baseline;
  SmlScorerKind sml_scorer = SmlScorerKind::Baseline;
  PreprocessConfig preprocess;
  DecomposeConfig decompose;
  SpectrogramConfig spectrogram;
  QualityTree quality_tree = QualityTree::default_tree();
  PpgQualityConfig ppg_quality;
  ImuOutlierConfig imu_outliers;
  HeartRateConfig heart_rate;
  RespiratoryConfig respiratory;
  PostureConfig posture;
  BaselineParams baseline;
  SmlBaselineParams sml_baseline;
  // SML gating: the fallback runs only when PPG and IMU look usable.
  double sml_min_ppg_fraction = 0.5;
  double sml_max_masked_fraction = 0.5;
  // Flagged samples per 5 s slot that count as a major movement.
  double major_move_samples = 25.0;
  std::size_t session_epochs_hint = 960;  // for the normalized-epoch feature
};

// Per-epoch vitals computed incrementally while streaming a session. Doubles
// as the engine behind the vitals command.
class VitalsEngine {
 public:
  struct EpochVitals {
    std::vector<HrEstimate> hr;           // one per 5 s window
    std::optional<RrEstimate> rr;         // completed 60 s windows only
    std::vector<Posture> posture;         // one per 10 s window
    std::vector<double> activity_counts;  // flagged IMU samples per 5 s
    std::vector<bool> imu_mask;           // this epoch's outlier mask
    int posture_changes = 0;
  };

  explicit VitalsEngine(const PipelineConfig& cfg);
  EpochVitals process(const EpochView& epoch);
  void reset();

  const std::deque<double>& hr_history() const { return hr_history_; }
  const std::deque<double>& rr_history() const { return rr_history_; }
  const std::deque<double>& activity_history() const { return activity_history_; }
  double minutes_since_major_move() const;

  // Trailing 60 s of IMU samples (previous + current epoch).
  const std::vector<double>& imu_window(int axis) const { return imu_window_[axis]; }
  const std::vector<bool>& imu_window_mask() const { return imu_window_mask_; }

 private:
  PipelineConfig cfg_;
  HeartRateTracker hr_tracker_;
  PostureTracker posture_tracker_;
  std::optional<Posture> last_posture_;
  std::deque<double> hr_history_;        // quality-true bpm, one per 5 s
  std::deque<double> rr_history_;        // one per completed minute
  std::deque<double> activity_history_;  // per 5 s slot
  std::vector<double> imu_window_[3];
  std::vector<bool> imu_window_mask_;
  std::array<std::vector<double>, 3> prev_imu_;
  std::vector<bool> prev_mask_;
  std::optional<std::size_t> last_major_move_slot_;
  std::size_t slot_counter_ = 0;
};

struct EpochDecision {
  std::size_t epoch = 0;
  SleepStage stage = SleepStage::Unscored;
  std::optional<StageDistribution> dist;
  StageSource source = StageSource::None;
  ChannelMask mask{};
  int n_derivations = 0;
};

// Real-time scoring: quality gating, re-referencing, per-derivation features
// and scoring, ensembling, with the PPG/IMU fallback when no derivation is
// scorable and Unscored when nothing usable remains.
class StagingPipeline {
 public:
  explicit StagingPipeline(PipelineConfig cfg = PipelineConfig{},
                           std::optional<PmlWeights> pml = std::nullopt,
                           std::optional<SmlWeights> sml = std::nullopt);

  EpochDecision process(const EpochView& epoch);
  void reset();

  VitalsEngine& vitals() { return vitals_; }
  const VitalsEngine::EpochVitals& last_vitals() const { return last_vitals_; }

 private:
  std::optional<StageDistribution> run_sml(const EpochView& epoch);

  PipelineConfig cfg_;
  std::optional<PmlWeights> pml_;
  std::optional<SmlWeights> sml_;
  VitalsEngine vitals_;
  VitalsEngine::EpochVitals last_vitals_;
  std::map<std::string, FeatureHistory> history_;
  std::vector<double> sml_hidden_;
  std::optional<std::pair<std::size_t, StageDistribution>> held_sml_;
};

// Stages every epoch of a recording; convenience for the CLI and tests.
struct StagedSession {
  Hypnogram hypnogram;
  std::vector<EpochDecision> decisions;
};

StagedSession stage_session(const SessionRecording& rec,
                            const PipelineConfig& cfg,
                            std::optional<PmlWeights> pml = std::nullopt,
                            std::optional<SmlWeights> sml = std::nullopt);

// ---------------------------------------------------------------------------
// Closed-loop session driver: staging, PoAs, SOL, the stimulation timeline
// and the content recommender, with the action log and PoAs trace as output.
// ---------------------------------------------------------------------------

struct ClosedLoopConfig {
  PipelineConfig pipeline;
  StimTimeline timeline;
  AcsConfig acs;
  double poas_alpha = 0.2;
  int sol_run_len = 2;
  int n_contents = 3;
  double prior_mu = 0.0;
  double prior_sigma2 = 100.0;
  double obs_variance = 1.0;
  std::uint64_t seed = 1;
};

struct ClosedLoopResult {
  std::vector<ControllerAction> actions;
  std::vector<std::pair<double, double>> poas_trace;
  std::vector<ArmPosterior> posteriors;
  std::optional<std::size_t> sol_epoch;
  double stop_t = 0.0;
};

ClosedLoopResult run_closed_loop(const SessionRecording& rec,
                                 const ClosedLoopConfig& cfg,
                                 std::vector<ArmPosterior> posteriors = {});

}  // namespace hypnos
