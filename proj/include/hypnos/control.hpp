#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hypnos/rng.hpp"
#include "hypnos/stage.hpp"

namespace hypnos {

// ---------------------------------------------------------------------------
// Probability of Being Asleep: exponentially smoothed non-wake probability
// mass, in percent.
// ---------------------------------------------------------------------------

struct PoAsState {
  double value = 0.0;        // percent, [0, 100]
  double alpha = 0.2;        // smoothing factor per epoch
  std::vector<std::pair<double, double>> history;  // (t seconds, value)
};

PoAsState update_poas(const StageDistribution& d, PoAsState s, double t_s);

// Least-squares slope of PoAs over the trailing window, in percent/minute.
std::optional<double> poas_slope(const PoAsState& s, double window_s);

// ---------------------------------------------------------------------------
// Streaming sleep-onset detection: fires once, at the first epoch opening a
// run of `run_len` consecutive sleep stages. Unscored breaks the run.
// ---------------------------------------------------------------------------

class SolDetector {
 public:
  explicit SolDetector(int run_len = 2) : run_len_(run_len) {}

  // Returns the onset epoch index the first time the run completes.
  std::optional<std::size_t> feed(SleepStage stage, std::size_t epoch_index);
  std::optional<std::size_t> detected() const { return detected_; }
  void reset();

 private:
  int run_len_;
  std::size_t run_ = 0;
  std::optional<std::size_t> detected_;
};

// ---------------------------------------------------------------------------
// Stimulation timeline and controller.
// ---------------------------------------------------------------------------

struct StimTimeline {
  double t1_s = 300.0;        // GBV -> RTV crossfade start
  double t2_s = 720.0;        // RTV fade-out start; BM-only afterwards
  double fade_s = 30.0;
  double hard_stop_s = 3000.0;  // 50 min

  void validate() const;
};

enum class StimPhase { Gbv, Rtv, Bm, Off };
const char* phase_name(StimPhase p);

struct ControllerState {
  StimPhase phase = StimPhase::Gbv;
  double vol_gbv = 0.0;
  double vol_rtv = 0.0;
  double vol_bm = 0.0;
  int current_content = 0;
  double last_switch_t = 0.0;
  std::optional<std::size_t> sol_epoch;
  std::optional<double> stop_fade_start;  // BM fade-out begin (SOL detected)
  double last_t = 0.0;
  bool started = false;
};

struct ControllerAction {
  double t = 0.0;
  std::string action;  // start|volume|switch_content|sol_detected|stop
  std::string layer;   // gbv|rtv|bm or empty
  double volume = 0.0;
  int content_id = -1;
};

struct AcsConfig {
  double window_min = 20.0;       // switching allowed only before this
  double slope_threshold = 0.5;   // percent/min
  double slope_window_s = 300.0;  // trailing slope window
  double min_gap_s = 300.0;       // minimum spacing between switches
};

// True iff the session clock is inside the switching window, at least 5 min
// of PoAs history exists, the trailing slope is below threshold and the last
// switch is old enough.
bool acs_should_switch(const PoAsState& poas, double t_s,
                       double last_switch_t_s, const AcsConfig& cfg = {});

// Advances the controller to time t_s (the end of the current epoch).
// Emits actions for layer volume changes, SOL detection and the final stop.
// Off is absorbing.
std::vector<ControllerAction> controller_step(
    ControllerState& state, std::optional<std::size_t> sol_epoch, double t_s,
    const StimTimeline& timeline);

// ---------------------------------------------------------------------------
// Thompson-sampling content recommendation.
// ---------------------------------------------------------------------------

struct ArmPosterior {
  double mu = 0.0;
  double sigma2 = 100.0;
  int n = 0;
};

// Conjugate normal update with known observation variance.
ArmPosterior acr_update(const ArmPosterior& prior, double reward,
                        double obs_variance = 1.0);

// Samples each non-excluded posterior once and returns the argmax index.
// Throws TooFewContents when fewer than 2 contents exist.
int acr_select(const std::vector<ArmPosterior>& posteriors, Rng& rng,
               std::optional<int> exclude = std::nullopt);

// Plain-text posterior store: `content_id,mu,sigma2,n` per line.
std::string posteriors_to_text(const std::vector<ArmPosterior>& ps);
std::vector<ArmPosterior> posteriors_from_text(const std::string& text);

}  // namespace hypnos
