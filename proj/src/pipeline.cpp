#include "hypnos/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/errors.hpp"

namespace hypnos {

const char* source_name(StageSource s) {
  switch (s) {
    case StageSource::Pml: return "PML";
    case StageSource::Sml: return "SML";
    case StageSource::None: return "none";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// VitalsEngine
// ---------------------------------------------------------------------------

VitalsEngine::VitalsEngine(const PipelineConfig& cfg)
    : cfg_(cfg), hr_tracker_(cfg.heart_rate), posture_tracker_(cfg.posture) {}

void VitalsEngine::reset() {
  hr_tracker_.reset();
  posture_tracker_.reset();
  last_posture_.reset();
  hr_history_.clear();
  rr_history_.clear();
  activity_history_.clear();
  for (auto& w : imu_window_) w.clear();
  imu_window_mask_.clear();
  for (auto& p : prev_imu_) p.clear();
  prev_mask_.clear();
  last_major_move_slot_.reset();
  slot_counter_ = 0;
}

VitalsEngine::EpochVitals VitalsEngine::process(const EpochView& epoch) {
  EpochVitals out;
  const double fs_ppg = epoch.fs_ppg;
  const double fs_imu = epoch.fs_imu;
  const std::size_t ppg_win =
      static_cast<std::size_t>(std::lround(5.0 * fs_ppg));
  const std::size_t imu_slot =
      static_cast<std::size_t>(std::lround(5.0 * fs_imu));

  out.imu_mask = imu_outlier_mask(epoch.imu[0], epoch.imu[1], epoch.imu[2],
                                  cfg_.imu_outliers);

  // HR per 5 s window.
  for (std::size_t w = 0; w * ppg_win + ppg_win <= epoch.ppg[0].size(); ++w) {
    std::array<std::span<const double>, 3> windows;
    for (int c = 0; c < 3; ++c)
      windows[c] = epoch.ppg[c].subspan(w * ppg_win, ppg_win);
    double t = epoch.start_s() + 5.0 * static_cast<double>(w);
    HrEstimate est = hr_tracker_.process(windows, fs_ppg, t);
    out.hr.push_back(est);
    if (est.quality) {
      hr_history_.push_back(est.bpm);
      while (hr_history_.size() > 60) hr_history_.pop_front();
    }
  }

  // Activity counts per 5 s slot, plus major-movement tracking.
  for (std::size_t sidx = 0; sidx * imu_slot + imu_slot <= out.imu_mask.size();
       ++sidx) {
    double count = 0.0;
    for (std::size_t k = sidx * imu_slot; k < (sidx + 1) * imu_slot; ++k)
      if (out.imu_mask[k]) count += 1.0;
    out.activity_counts.push_back(count);
    activity_history_.push_back(count);
    while (activity_history_.size() > 60) activity_history_.pop_front();
    if (count >= cfg_.major_move_samples) last_major_move_slot_ = slot_counter_;
    ++slot_counter_;
  }

  // Posture per 10 s window.
  const std::size_t pos_win =
      static_cast<std::size_t>(std::lround(10.0 * fs_imu));
  for (std::size_t w = 0; w * pos_win + pos_win <= epoch.imu[0].size(); ++w) {
    std::vector<bool> mask(out.imu_mask.begin() + static_cast<long>(w * pos_win),
                           out.imu_mask.begin() + static_cast<long>((w + 1) * pos_win));
    Posture p;
    try {
      p = posture_tracker_.update(epoch.imu[0].subspan(w * pos_win, pos_win),
                                  epoch.imu[1].subspan(w * pos_win, pos_win),
                                  epoch.imu[2].subspan(w * pos_win, pos_win),
                                  mask);
    } catch (const Error&) {
      p = last_posture_.value_or(Posture::Supine);
    }
    if (last_posture_ && p != *last_posture_) ++out.posture_changes;
    last_posture_ = p;
    out.posture.push_back(p);
  }

  // Maintain the trailing 60 s IMU window (previous epoch + this one).
  for (int a = 0; a < 3; ++a) {
    imu_window_[a].clear();
    imu_window_[a].insert(imu_window_[a].end(), prev_imu_[a].begin(),
                          prev_imu_[a].end());
    imu_window_[a].insert(imu_window_[a].end(), epoch.imu[a].begin(),
                          epoch.imu[a].end());
  }
  imu_window_mask_.clear();
  imu_window_mask_.insert(imu_window_mask_.end(), prev_mask_.begin(),
                          prev_mask_.end());
  imu_window_mask_.insert(imu_window_mask_.end(), out.imu_mask.begin(),
                          out.imu_mask.end());

  // RR on completed, non-overlapping 60 s windows (odd epoch indices).
  if (epoch.index % 2 == 1 && !prev_imu_[1].empty()) {
    try {
      RrEstimate rr = respiratory_rate(imu_window_[1], imu_window_mask_, fs_imu,
                                       epoch.start_s() - 30.0, cfg_.respiratory);
      out.rr = rr;
      rr_history_.push_back(rr.brpm);
      while (rr_history_.size() > 5) rr_history_.pop_front();
    } catch (const Error&) {
      out.rr.reset();
    }
  }

  for (int a = 0; a < 3; ++a)
    prev_imu_[a].assign(epoch.imu[a].begin(), epoch.imu[a].end());
  prev_mask_ = out.imu_mask;
  return out;
}

double VitalsEngine::minutes_since_major_move() const {
  if (!last_major_move_slot_) return 60.0;  // far in the past
  return static_cast<double>(slot_counter_ - 1 - *last_major_move_slot_) *
         5.0 / 60.0;
}

// ---------------------------------------------------------------------------
// StagingPipeline
// ---------------------------------------------------------------------------

StagingPipeline::StagingPipeline(PipelineConfig cfg,
                                 std::optional<PmlWeights> pml,
                                 std::optional<SmlWeights> sml)
    : cfg_(std::move(cfg)), pml_(std::move(pml)), sml_(std::move(sml)),
      vitals_(cfg_) {
  if (cfg_.scorer == ScorerKind::Pml) {
    if (!pml_) raise(ErrorCode::ConfigError, "PML scorer needs weights");
    pml_->validate();
  }
  if (cfg_.sml_scorer == SmlScorerKind::Net) {
    if (!sml_) raise(ErrorCode::ConfigError, "SML net scorer needs weights");
    sml_->validate();
    sml_hidden_.assign(sml_->hidden_dim(), 0.0);
  }
}

void StagingPipeline::reset() {
  vitals_.reset();
  history_.clear();
  std::fill(sml_hidden_.begin(), sml_hidden_.end(), 0.0);
  held_sml_.reset();
  last_vitals_ = {};
}

std::optional<StageDistribution> StagingPipeline::run_sml(const EpochView& epoch) {
  // Reuse the held minute-level output when this epoch is covered by it.
  if (held_sml_ && held_sml_->first == epoch.index) return held_sml_->second;

  // Gating: enough clean PPG windows and a mostly unmasked IMU.
  int ppg_ok = 0, ppg_total = 0;
  const std::size_t ppg_win =
      static_cast<std::size_t>(std::lround(5.0 * epoch.fs_ppg));
  for (std::size_t w = 0; w * ppg_win + ppg_win <= epoch.ppg[0].size(); ++w) {
    bool any = false;
    for (int c = 0; c < 3 && !any; ++c) {
      try {
        any = ppg_quality(epoch.ppg[c].subspan(w * ppg_win, ppg_win),
                          epoch.fs_ppg, cfg_.ppg_quality);
      } catch (const Error&) {
        any = false;
      }
    }
    ppg_ok += any ? 1 : 0;
    ++ppg_total;
  }
  if (ppg_total == 0 ||
      static_cast<double>(ppg_ok) / ppg_total < cfg_.sml_min_ppg_fraction)
    return std::nullopt;

  const auto& mask = last_vitals_.imu_mask;
  if (!mask.empty()) {
    double flagged = 0.0;
    for (bool b : mask) flagged += b ? 1.0 : 0.0;
    if (flagged / static_cast<double>(mask.size()) > cfg_.sml_max_masked_fraction)
      return std::nullopt;
  }

  // Assemble the 60 s window features.
  SmlWindow w;
  const auto& hr_hist = vitals_.hr_history();
  if (hr_hist.empty()) return std::nullopt;
  const std::size_t hr_take = std::min<std::size_t>(12, hr_hist.size());
  w.hr_bpm.assign(hr_hist.end() - static_cast<long>(hr_take), hr_hist.end());
  w.hr_trailing.assign(hr_hist.begin(), hr_hist.end());
  const auto& rr_hist = vitals_.rr_history();
  w.rr_brpm.assign(rr_hist.begin(), rr_hist.end());
  if (w.rr_brpm.empty()) w.rr_brpm.push_back(14.0);  // neutral prior
  w.imu_x = vitals_.imu_window(0);
  w.imu_y = vitals_.imu_window(1);
  w.imu_z = vitals_.imu_window(2);
  w.imu_mask = vitals_.imu_window_mask();
  w.fs_imu = epoch.fs_imu;
  w.posture_changes = last_vitals_.posture_changes;
  w.minutes_since_major_move = vitals_.minutes_since_major_move();
  w.epoch_index_norm =
      std::min(1.0, static_cast<double>(epoch.index) /
                        std::max<std::size_t>(1, cfg_.session_epochs_hint));
  const auto& act_hist = vitals_.activity_history();
  w.activity_trailing.assign(act_hist.begin(), act_hist.end());

  if (w.imu_y.size() < static_cast<std::size_t>(59.0 * epoch.fs_imu))
    return std::nullopt;  // needs the previous epoch for a full minute

  SmlFeatures f = sml_features(w);
  StageDistribution d;
  if (cfg_.sml_scorer == SmlScorerKind::Net) {
    d = sml_forward(f, *sml_, sml_hidden_);
  } else {
    d = baseline_sml_stage(f, cfg_.sml_baseline);
  }
  held_sml_ = {epoch.index + 1, d};
  return d;
}

EpochDecision StagingPipeline::process(const EpochView& epoch) {
  EpochDecision out;
  out.epoch = epoch.index;

  last_vitals_ = vitals_.process(epoch);

  out.mask = select_channels(epoch, cfg_.quality_tree);
  std::vector<Derivation> derivations =
      apply_scheme(epoch, out.mask, cfg_.scheme);
  out.n_derivations = static_cast<int>(derivations.size());

  if (!derivations.empty()) {
    std::vector<StageDistribution> dists;
    dists.reserve(derivations.size());
    for (const Derivation& d : derivations) {
      std::vector<double> clean =
          preprocess(d.samples, epoch.fs_exg, cfg_.preprocess);
      ComponentSignals comps = decompose(clean, epoch.fs_exg, cfg_.decompose);
      EpochFeatures feats = epoch_features(comps, epoch.fs_exg);
      FeatureHistory& hist = history_[d.name];
      hist.push(feats.fv);
      if (cfg_.scorer == ScorerKind::Pml) {
        EpochSpectrogram sg =
            epoch_spectrogram(comps.eeg, epoch.fs_exg, cfg_.spectrogram);
        dists.push_back(pml_forward(sg, hist, *pml_));
      } else {
        dists.push_back(baseline_stage(feats.rsp, feats.fv, cfg_.baseline));
      }
    }
    out.dist = ensemble(dists);
    out.stage = out.dist->argmax();
    out.source = StageSource::Pml;
    return out;
  }

  if (auto d = run_sml(epoch)) {
    out.dist = *d;
    out.stage = d->argmax();
    out.source = StageSource::Sml;
    return out;
  }

  out.stage = SleepStage::Unscored;
  out.source = StageSource::None;
  return out;
}

StagedSession stage_session(const SessionRecording& rec,
                            const PipelineConfig& cfg,
                            std::optional<PmlWeights> pml,
                            std::optional<SmlWeights> sml) {
  PipelineConfig c = cfg;
  auto epochs = slice_epochs(rec);
  c.session_epochs_hint = std::max<std::size_t>(1, epochs.size());
  StagingPipeline pipe(c, std::move(pml), std::move(sml));
  StagedSession out;
  out.hypnogram.stages.reserve(epochs.size());
  for (const EpochView& e : epochs) {
    EpochDecision d = pipe.process(e);
    out.hypnogram.stages.push_back(d.stage);
    out.decisions.push_back(std::move(d));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Closed loop
// ---------------------------------------------------------------------------

ClosedLoopResult run_closed_loop(const SessionRecording& rec,
                                 const ClosedLoopConfig& cfg,
                                 std::vector<ArmPosterior> posteriors) {
  cfg.timeline.validate();
  if (cfg.n_contents < 2)
    raise(ErrorCode::TooFewContents, "need at least 2 contents");

  ClosedLoopResult res;
  res.posteriors = std::move(posteriors);
  if (res.posteriors.size() < static_cast<std::size_t>(cfg.n_contents))
    res.posteriors.resize(static_cast<std::size_t>(cfg.n_contents),
                          ArmPosterior{cfg.prior_mu, cfg.prior_sigma2, 0});

  auto epochs = slice_epochs(rec);
  PipelineConfig pc = cfg.pipeline;
  pc.session_epochs_hint = std::max<std::size_t>(1, epochs.size());
  StagingPipeline pipe(pc);
  SolDetector sol(cfg.sol_run_len);
  PoAsState poas;
  poas.alpha = cfg.poas_alpha;
  ControllerState state;
  Rng rng(cfg.seed);

  // First selection of the session: nothing is playing yet, no exclusion.
  state.current_content = acr_select(res.posteriors, rng);
  double content_start = 0.0;

  auto content_reward = [&](double t_end) -> std::optional<double> {
    // Slope of PoAs strictly inside the play interval, fade-in excluded.
    double lo = content_start == 0.0 ? cfg.timeline.fade_s : content_start;
    double sum_t = 0.0, sum_v = 0.0;
    std::size_t n = 0;
    for (const auto& [t, v] : poas.history) {
      if (t < lo || t > t_end) continue;
      sum_t += t;
      sum_v += v;
      ++n;
    }
    if (n < 2) return std::nullopt;
    double mt = sum_t / static_cast<double>(n);
    double mv = sum_v / static_cast<double>(n);
    double num = 0.0, den = 0.0;
    for (const auto& [t, v] : poas.history) {
      if (t < lo || t > t_end) continue;
      num += (t - mt) * (v - mv);
      den += (t - mt) * (t - mt);
    }
    if (!(den > 0.0)) return std::nullopt;
    return num / den * 60.0;
  };

  for (const EpochView& e : epochs) {
    EpochDecision d = pipe.process(e);
    const double t_end = (static_cast<double>(e.index) + 1.0) * 30.0;
    if (d.dist) {
      poas = update_poas(*d.dist, poas, t_end);
      res.poas_trace.emplace_back(t_end, poas.value);
    }
    std::optional<std::size_t> fired = sol.feed(d.stage, e.index);
    if (fired) res.sol_epoch = fired;

    auto actions = controller_step(state, fired, t_end, cfg.timeline);
    res.actions.insert(res.actions.end(), actions.begin(), actions.end());
    if (state.phase == StimPhase::Off) {
      res.stop_t = res.actions.empty() ? t_end : res.actions.back().t;
      double reward_end = state.stop_fade_start.value_or(res.stop_t);
      if (auto reward = content_reward(reward_end))
        res.posteriors[static_cast<std::size_t>(state.current_content)] =
            acr_update(res.posteriors[static_cast<std::size_t>(state.current_content)],
                       *reward, cfg.obs_variance);
      break;
    }

    if (acs_should_switch(poas, t_end, state.last_switch_t, cfg.acs)) {
      if (auto reward = content_reward(t_end))
        res.posteriors[static_cast<std::size_t>(state.current_content)] =
            acr_update(res.posteriors[static_cast<std::size_t>(state.current_content)],
                       *reward, cfg.obs_variance);
      int next = acr_select(res.posteriors, rng, state.current_content);
      state.current_content = next;
      state.last_switch_t = t_end;
      content_start = t_end;
      ControllerAction a;
      a.t = t_end;
      a.action = "switch_content";
      a.layer = "bm";
      a.volume = state.vol_bm;
      a.content_id = next;
      res.actions.push_back(a);
    }
  }
  return res;
}

}  // namespace hypnos
