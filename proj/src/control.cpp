#include "hypnos/control.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hypnos/errors.hpp"

namespace hypnos {

PoAsState update_poas(const StageDistribution& d, PoAsState s, double t_s) {
  const double raw = 100.0 * d.sleep_mass();
  s.value = std::clamp(s.alpha * raw + (1.0 - s.alpha) * s.value, 0.0, 100.0);
  s.history.emplace_back(t_s, s.value);
  return s;
}

std::optional<double> poas_slope(const PoAsState& s, double window_s) {
  if (s.history.size() < 2) return std::nullopt;
  const double t_end = s.history.back().first;
  double sum_t = 0.0, sum_v = 0.0;
  std::size_t n = 0;
  for (const auto& [t, v] : s.history) {
    if (t < t_end - window_s) continue;
    sum_t += t;
    sum_v += v;
    ++n;
  }
  if (n < 2) return std::nullopt;
  const double mt = sum_t / static_cast<double>(n);
  const double mv = sum_v / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (const auto& [t, v] : s.history) {
    if (t < t_end - window_s) continue;
    num += (t - mt) * (v - mv);
    den += (t - mt) * (t - mt);
  }
  if (!(den > 0.0)) return std::nullopt;
  return num / den * 60.0;  // percent per minute
}

std::optional<std::size_t> SolDetector::feed(SleepStage stage,
                                             std::size_t epoch_index) {
  if (detected_) return std::nullopt;
  if (is_sleep(stage)) {
    ++run_;
    if (run_ >= static_cast<std::size_t>(run_len_)) {
      detected_ = epoch_index + 1 - static_cast<std::size_t>(run_len_);
      return detected_;
    }
  } else {
    run_ = 0;
  }
  return std::nullopt;
}

void SolDetector::reset() {
  run_ = 0;
  detected_.reset();
}

void StimTimeline::validate() const {
  if (!(0.0 < t1_s && t1_s < t2_s && t2_s < hard_stop_s) || !(fade_s > 0.0))
    raise(ErrorCode::ConfigError, "timeline must satisfy 0 < t1 < t2 < hard_stop");
  if (t1_s + fade_s > t2_s || t2_s + fade_s > hard_stop_s)
    raise(ErrorCode::ConfigError, "fades must not overlap timeline boundaries");
}

const char* phase_name(StimPhase p) {
  switch (p) {
    case StimPhase::Gbv: return "gbv";
    case StimPhase::Rtv: return "rtv";
    case StimPhase::Bm: return "bm";
    case StimPhase::Off: return "off";
  }
  return "?";
}

bool acs_should_switch(const PoAsState& poas, double t_s,
                       double last_switch_t_s, const AcsConfig& cfg) {
  if (t_s >= cfg.window_min * 60.0) return false;
  if (t_s - last_switch_t_s < cfg.min_gap_s) return false;
  if (poas.history.empty() ||
      poas.history.back().first - poas.history.front().first <
          cfg.slope_window_s - 1e-9)
    return false;
  auto slope = poas_slope(poas, cfg.slope_window_s);
  return slope && *slope < cfg.slope_threshold;
}

namespace {

struct Volumes {
  double gbv = 0.0, rtv = 0.0, bm = 0.0;
};

Volumes volumes_at(double t, const StimTimeline& tl,
                   std::optional<double> stop_fade_start) {
  Volumes v;
  v.bm = std::clamp(t / tl.fade_s, 0.0, 1.0);
  if (t < tl.t1_s) {
    v.gbv = 1.0;
  } else {
    v.gbv = std::clamp(1.0 - (t - tl.t1_s) / tl.fade_s, 0.0, 1.0);
  }
  double rtv_in = std::clamp((t - tl.t1_s) / tl.fade_s, 0.0, 1.0);
  double rtv_out = std::clamp(1.0 - (t - tl.t2_s) / tl.fade_s, 0.0, 1.0);
  v.rtv = std::min(rtv_in, rtv_out);
  if (stop_fade_start) {
    double k = std::clamp(1.0 - (t - *stop_fade_start) / tl.fade_s, 0.0, 1.0);
    v.gbv *= k;
    v.rtv *= k;
    v.bm *= k;
  }
  return v;
}

StimPhase phase_at(double t, const StimTimeline& tl) {
  if (t < tl.t1_s) return StimPhase::Gbv;
  if (t < tl.t2_s) return StimPhase::Rtv;
  return StimPhase::Bm;
}

}  // namespace

std::vector<ControllerAction> controller_step(
    ControllerState& state, std::optional<std::size_t> sol_epoch, double t_s,
    const StimTimeline& timeline) {
  timeline.validate();
  std::vector<ControllerAction> actions;
  if (state.phase == StimPhase::Off) return actions;  // absorbing

  auto emit = [&](double t, const std::string& action, const std::string& layer,
                  double volume) {
    ControllerAction a;
    a.t = t;
    a.action = action;
    a.layer = layer;
    a.volume = volume;
    a.content_id = state.current_content;
    actions.push_back(a);
  };

  if (!state.started) {
    state.started = true;
    state.phase = StimPhase::Gbv;
    emit(0.0, "start", "", 0.0);
  }

  if (sol_epoch && !state.sol_epoch) {
    state.sol_epoch = sol_epoch;
    state.stop_fade_start = std::min(t_s, timeline.hard_stop_s);
    emit(*state.stop_fade_start, "sol_detected", "", 0.0);
  }

  // The session ends at the earlier of hard stop and completed SOL fade-out.
  double stop_t = timeline.hard_stop_s;
  if (state.stop_fade_start)
    stop_t = std::min(stop_t, *state.stop_fade_start + timeline.fade_s);
  const bool stopping = t_s >= stop_t;
  const double t_eval = stopping ? stop_t : t_s;

  Volumes v = stopping ? Volumes{}
                       : volumes_at(t_eval, timeline, state.stop_fade_start);
  if (v.gbv != state.vol_gbv) emit(t_eval, "volume", "gbv", v.gbv);
  if (v.rtv != state.vol_rtv) emit(t_eval, "volume", "rtv", v.rtv);
  if (v.bm != state.vol_bm) emit(t_eval, "volume", "bm", v.bm);
  state.vol_gbv = v.gbv;
  state.vol_rtv = v.rtv;
  state.vol_bm = v.bm;

  if (stopping) {
    state.phase = StimPhase::Off;
    emit(stop_t, "stop", "", 0.0);
  } else {
    state.phase = phase_at(t_eval, timeline);
  }
  state.last_t = t_eval;
  return actions;
}

ArmPosterior acr_update(const ArmPosterior& prior, double reward,
                        double obs_variance) {
  if (!(obs_variance > 0.0))
    raise(ErrorCode::ConfigError, "observation variance must be positive");
  if (!std::isfinite(reward))
    raise(ErrorCode::ConfigError, "reward must be finite");
  ArmPosterior post;
  const double precision = 1.0 / prior.sigma2 + 1.0 / obs_variance;
  post.sigma2 = 1.0 / precision;
  post.mu = (prior.mu / prior.sigma2 + reward / obs_variance) / precision;
  post.n = prior.n + 1;
  return post;
}

int acr_select(const std::vector<ArmPosterior>& posteriors, Rng& rng,
               std::optional<int> exclude) {
  if (posteriors.size() < 2)
    raise(ErrorCode::TooFewContents, "need at least 2 contents");
  int best = -1;
  double best_sample = 0.0;
  for (int i = 0; i < static_cast<int>(posteriors.size()); ++i) {
    if (exclude && *exclude == i) continue;
    const auto& p = posteriors[static_cast<std::size_t>(i)];
    double sample = p.mu + std::sqrt(p.sigma2) * rng.normal();
    if (best < 0 || sample > best_sample) {
      best = i;
      best_sample = sample;
    }
  }
  return best;
}

std::string posteriors_to_text(const std::vector<ArmPosterior>& ps) {
  std::ostringstream out;
  out.precision(17);
  out << "content_id,mu,sigma2,n\n";
  for (std::size_t i = 0; i < ps.size(); ++i)
    out << i << "," << ps[i].mu << "," << ps[i].sigma2 << "," << ps[i].n << "\n";
  return out.str();
}

std::vector<ArmPosterior> posteriors_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<ArmPosterior> out;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("content_id", 0) == 0)
      continue;
    std::istringstream row(line);
    std::string cell;
    ArmPosterior p;
    std::size_t idx = 0;
    if (!std::getline(row, cell, ',')) continue;
    idx = static_cast<std::size_t>(std::stoul(cell));
    if (!std::getline(row, cell, ','))
      raise(ErrorCode::FormatError, "posterior row missing mu");
    p.mu = std::stod(cell);
    if (!std::getline(row, cell, ','))
      raise(ErrorCode::FormatError, "posterior row missing sigma2");
    p.sigma2 = std::stod(cell);
    if (!std::getline(row, cell, ','))
      raise(ErrorCode::FormatError, "posterior row missing n");
    p.n = std::stoi(cell);
    if (out.size() <= idx) out.resize(idx + 1);
    out[idx] = p;
  }
  return out;
}

}  // namespace hypnos
