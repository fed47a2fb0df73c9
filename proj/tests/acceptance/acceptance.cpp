// Acceptance gate: runs every release criterion end to end against the
// synthetic oracle and prints one pass/fail line per criterion. The first
// argument is the CLI binary (used by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "hypnos/config.hpp"
#include "hypnos/csvio.hpp"
#include "hypnos/errors.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/rng.hpp"
#include "hypnos/smoothing.hpp"
#include "hypnos/synth.hpp"

namespace fs = std::filesystem;
using namespace hypnos;
using Clock = std::chrono::steady_clock;

namespace {

std::string g_cli_path;

struct Check {
  bool ok = true;
  std::string detail;

  void expect(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// 1. Viterbi oracle equivalence
// ---------------------------------------------------------------------------

// Exhaustive enumeration of all 4^n paths with incremental prefix scoring;
// independent of the dynamic-programming decoder it checks.
struct BruteForce {
  const Hypnogram& observed;
  const HmmParams& p;
  std::vector<int> path, best_path;
  double best = -1e300;

  void walk(std::size_t e, int prev, double score) {
    if (e == observed.size()) {
      if (score > best) {
        best = score;
        best_path = path;
      }
      return;
    }
    for (int s = 0; s < 4; ++s) {
      double step = std::log(p.emission[s][static_cast<int>(observed[e])]);
      step += prev < 0 ? std::log(p.initial[s])
                       : std::log(p.transition[prev][s]);
      path.push_back(s);
      walk(e + 1, s, score + step);
      path.pop_back();
    }
  }
};

Hypnogram brute_force_map(const Hypnogram& observed, const HmmParams& p) {
  BruteForce bf{observed, p, {}, {}, -1e300};
  bf.walk(0, -1, 0.0);
  Hypnogram out;
  for (int s : bf.best_path) out.stages.push_back(static_cast<SleepStage>(s));
  return out;
}

HmmParams random_params(Rng& rng) {
  HmmParams p;
  for (int s = 0; s < 4; ++s) {
    double ts = 0.0, es = 0.0;
    for (int t = 0; t < 4; ++t) ts += p.transition[s][t] = 0.02 + rng.uniform();
    for (int o = 0; o < 5; ++o) es += p.emission[s][o] = 0.02 + rng.uniform();
    for (int t = 0; t < 4; ++t) p.transition[s][t] /= ts;
    for (int o = 0; o < 5; ++o) p.emission[s][o] /= es;
  }
  double is = 0.0;
  for (int s = 0; s < 4; ++s) is += p.initial[s] = 0.02 + rng.uniform();
  for (int s = 0; s < 4; ++s) p.initial[s] /= is;
  return p;
}

Check criterion_viterbi_oracle() {
  Check c;
  auto t0 = Clock::now();
  Rng rng(0xC1);
  int trials = 0;
  for (int trial = 0; trial < 120; ++trial) {
    HmmParams p = random_params(rng);
    std::size_t n = 2 + rng.uniform_index(11);  // lengths 2..12
    Hypnogram obs;
    for (std::size_t e = 0; e < n; ++e)
      obs.stages.push_back(static_cast<SleepStage>(rng.uniform_index(5)));
    Hypnogram got = viterbi(obs, p);
    Hypnogram want = brute_force_map(obs, p);
    if (!(got == want)) {
      c.expect(false, "mismatch at trial " + std::to_string(trial));
      break;
    }
    ++trials;
  }
  double dt = seconds_since(t0);
  c.expect(trials == 120, "only " + std::to_string(trials) + " trials ran");
  c.expect(dt < 10.0, "took " + fmt(dt) + " s (budget 10 s)");
  c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(trials) +
              " exact matches in " + fmt(dt) + " s";
  return c;
}

// ---------------------------------------------------------------------------
// 2. Smoothing completeness + idempotence
// ---------------------------------------------------------------------------

Check criterion_smoothing_completeness() {
  Check c;
  Rng rng(0xC2);
  std::vector<std::pair<Hypnogram, Hypnogram>> corpus;
  std::vector<Hypnogram> observed_nights;
  for (int night = 0; night < 12; ++night) {
    SessionSpec spec;
    spec.seed = 500 + static_cast<std::uint64_t>(night);
    spec.n_epochs = 700 + rng.uniform_index(260);
    spec.sol_epoch = 20 + rng.uniform_index(60);
    Hypnogram truth = gen_hypnogram(spec);
    Hypnogram obs = truth;
    double frac = 0.01 + 0.29 * rng.uniform();
    for (auto& s : obs.stages) {
      if (rng.uniform() < frac) s = SleepStage::Unscored;
      else if (rng.uniform() < 0.05)
        s = static_cast<SleepStage>(rng.uniform_index(4));
    }
    corpus.emplace_back(truth, obs);
    observed_nights.push_back(std::move(obs));
  }
  HmmParams params = estimate_hmm(corpus);
  for (const Hypnogram& obs : observed_nights) {
    Hypnogram out = smooth(obs, params);
    c.expect(out.count(SleepStage::Unscored) == 0, "unscored epochs remain");
    c.expect(smooth(out, params) == out, "smoothing is not idempotent");
  }
  c.detail = std::to_string(observed_nights.size()) +
             " nights, 1-30% unscored, all completed";
  return c;
}

// ---------------------------------------------------------------------------
// 3. Baseline staging accuracy on the clean corpus
// ---------------------------------------------------------------------------

Check criterion_baseline_staging() {
  Check c;
  ConfusionMatrix pooled;
  double worst_night_s = 0.0;
  double worst_night_acc = 1.0;
  for (int night = 0; night < 20; ++night) {
    SessionSpec spec;
    spec.seed = 1000 + static_cast<std::uint64_t>(night);
    spec.n_epochs = 960;
    spec.sol_epoch = 30 + (night * 7) % 60;
    SyntheticSession s = generate_session(spec);
    auto t0 = Clock::now();
    StagedSession staged = stage_session(s.recording, PipelineConfig{});
    worst_night_s = std::max(worst_night_s, seconds_since(t0));
    ConfusionMatrix cm = confusion(staged.hypnogram, s.truth.hypnogram);
    double acc = metrics(cm).accuracy;
    worst_night_acc = std::min(worst_night_acc, acc);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) pooled.counts[i][j] += cm.counts[i][j];
    pooled.unscored_pred += cm.unscored_pred;
  }
  Metrics m = metrics(pooled);
  c.expect(m.accuracy >= 0.85, "accuracy " + fmt(m.accuracy) + " < 0.85");
  for (int s = 0; s < 4; ++s)
    c.expect(m.per_class[s].f1 >= 0.75,
             std::string(stage_name(static_cast<SleepStage>(s))) + " F1 " +
                 fmt(m.per_class[s].f1) + " < 0.75");
  c.expect(worst_night_s < 120.0,
           "slowest night " + fmt(worst_night_s) + " s (budget 120 s)");
  c.detail = "accuracy " + fmt(m.accuracy) + ", worst night " +
             fmt(worst_night_acc) + ", F1 [" + fmt(m.per_class[0].f1) + " " +
             fmt(m.per_class[1].f1) + " " + fmt(m.per_class[2].f1) + " " +
             fmt(m.per_class[3].f1) + "], slowest " + fmt(worst_night_s) + " s";
  return c;
}

// ---------------------------------------------------------------------------
// 4. SOL estimation with mild artifacts
// ---------------------------------------------------------------------------

Check criterion_sol_estimation() {
  Check c;
  Rng rng(0xC4);
  int within = 0;
  const int sessions = 50;
  for (int k = 0; k < sessions; ++k) {
    SessionSpec spec;
    spec.seed = 2000 + static_cast<std::uint64_t>(k);
    spec.n_epochs = 100;
    spec.sol_epoch = 20 + rng.uniform_index(50);
    // Mild artifacts: two short single-channel corruptions.
    for (int a = 0; a < 2; ++a) {
      double t0 = 30.0 * static_cast<double>(rng.uniform_index(96));
      const char* kinds[3] = {"flatline", "line_noise", "movement"};
      ArtifactSpan span;
      span.kind = kinds[rng.uniform_index(3)];
      span.t0_s = t0;
      span.t1_s = t0 + 30.0 * static_cast<double>(1 + rng.uniform_index(2));
      span.channels = {static_cast<int>(rng.uniform_index(6))};
      span.magnitude = 40.0;
      spec.artifacts.push_back(span);
    }
    SyntheticSession s = generate_session(spec);
    StagedSession staged = stage_session(s.recording, PipelineConfig{});
    SolDetector det(2);
    std::optional<std::size_t> est;
    for (std::size_t e = 0; e < staged.hypnogram.size() && !est; ++e)
      est = det.feed(staged.hypnogram[e], e);
    if (est && std::llabs(static_cast<long long>(*est) -
                          static_cast<long long>(spec.sol_epoch)) <= 5)
      ++within;
  }
  double frac = static_cast<double>(within) / sessions;
  c.expect(frac >= 0.96, "only " + fmt(100.0 * frac) + "% within +-5 epochs");
  c.detail = std::to_string(within) + "/" + std::to_string(sessions) +
             " within +-5 epochs";
  return c;
}

// ---------------------------------------------------------------------------
// 5. Vitals round trip
// ---------------------------------------------------------------------------

Check criterion_vitals_round_trip() {
  Check c;
  Rng rng(0xC5);

  for (double hr : {60.0, 75.0, 90.0}) {
    SessionSpec spec;
    spec.seed = 3000 + static_cast<std::uint64_t>(hr);
    spec.n_epochs = 10;
    spec.sol_epoch = 2;
    spec.hr_const_bpm = hr;
    spec.rr_const_brpm = 14.0;
    spec.movement_rate_per_wake_epoch = 0.0;
    SyntheticSession s = generate_session(spec);

    // Clean pass.
    {
      PipelineConfig pc;
      VitalsEngine engine(pc);
      double worst = 0.0;
      for (const EpochView& e : slice_epochs(s.recording)) {
        auto v = engine.process(e);
        for (const auto& est : v.hr)
          if (est.quality && est.window_start > 10.0)
            worst = std::max(worst, std::abs(est.bpm - hr));
      }
      c.expect(worst <= 1.0, "clean HR " + fmt(hr) + " error " + fmt(worst));
    }

    // One noise burst per 5 s window on one PPG channel.
    {
      SessionRecording noisy = s.recording;
      const std::size_t win = 250;  // 5 s at 50 Hz
      for (std::size_t w = 0; w * win + win <= noisy.ppg[2].size(); ++w) {
        std::size_t start = w * win + rng.uniform_index(win - 25);
        for (std::size_t i = start; i < start + 25; ++i)
          noisy.ppg[2][i] += rng.normal(0.0, 120.0);
      }
      PipelineConfig pc;
      VitalsEngine engine(pc);
      double worst = 0.0;
      for (const EpochView& e : slice_epochs(noisy)) {
        auto v = engine.process(e);
        for (const auto& est : v.hr)
          if (est.quality && est.window_start > 10.0)
            worst = std::max(worst, std::abs(est.bpm - hr));
      }
      c.expect(worst <= 2.0, "noisy HR " + fmt(hr) + " error " + fmt(worst));
    }
  }

  for (double rr : {12.0, 16.0, 20.0}) {
    SessionSpec spec;
    spec.seed = 3100 + static_cast<std::uint64_t>(rr);
    spec.n_epochs = 10;
    spec.sol_epoch = 2;
    spec.hr_const_bpm = 70.0;
    spec.rr_const_brpm = rr;
    spec.movement_rate_per_wake_epoch = 0.0;
    SyntheticSession s = generate_session(spec);

    {
      PipelineConfig pc;
      VitalsEngine engine(pc);
      double worst = 0.0;
      int count = 0;
      for (const EpochView& e : slice_epochs(s.recording)) {
        auto v = engine.process(e);
        if (v.rr) {
          worst = std::max(worst, std::abs(v.rr->brpm - rr));
          ++count;
        }
      }
      c.expect(count >= 4, "too few clean RR estimates");
      c.expect(worst <= 0.5, "clean RR " + fmt(rr) + " error " + fmt(worst));
    }

    // One movement burst per 60 s window.
    {
      SessionRecording noisy = s.recording;
      const std::size_t minute = 3000;  // 60 s at 50 Hz
      for (std::size_t w = 0; w * minute + minute <= noisy.imu[1].size(); ++w) {
        std::size_t start = w * minute + rng.uniform_index(minute - 60);
        for (std::size_t i = start; i < start + 60; ++i) {
          for (int axis = 0; axis < 3; ++axis)
            noisy.imu[axis][i] += rng.uniform(-0.9, 0.9);
        }
      }
      PipelineConfig pc;
      VitalsEngine engine(pc);
      double worst = 0.0;
      int count = 0;
      for (const EpochView& e : slice_epochs(noisy)) {
        auto v = engine.process(e);
        if (v.rr) {
          worst = std::max(worst, std::abs(v.rr->brpm - rr));
          ++count;
        }
      }
      c.expect(count >= 4, "too few noisy RR estimates");
      c.expect(worst <= 1.0, "noisy RR " + fmt(rr) + " error " + fmt(worst));
    }
  }
  if (c.ok) c.detail = "HR {60,75,90} and RR {12,16,20}, clean and with bursts";
  return c;
}

// ---------------------------------------------------------------------------
// 6. Channel gating on the labeled-artifact corpus + scheme inclusion
// ---------------------------------------------------------------------------

Check criterion_channel_gating() {
  Check c;
  Rng rng(0xC6);
  QualityTree tree = QualityTree::default_tree();
  std::uint64_t bad_total = 0, bad_rejected = 0;
  std::uint64_t clean_total = 0, clean_rejected = 0;
  bool inclusion = true;

  for (int session = 0; session < 8; ++session) {
    SessionSpec spec;
    spec.seed = 4000 + static_cast<std::uint64_t>(session);
    spec.n_epochs = 60;
    spec.sol_epoch = 10;
    spec.movement_rate_per_wake_epoch = 0.0;

    // Epoch-aligned labeled artifacts.
    std::vector<std::vector<bool>> bad(
        6, std::vector<bool>(spec.n_epochs, false));
    const char* kinds[4] = {"flatline", "saturation", "line_noise", "movement"};
    for (int a = 0; a < 6; ++a) {
      std::size_t e0 = rng.uniform_index(spec.n_epochs - 4);
      std::size_t len = 1 + rng.uniform_index(3);
      int channel = static_cast<int>(rng.uniform_index(6));
      ArtifactSpan span;
      span.kind = kinds[rng.uniform_index(4)];
      span.t0_s = 30.0 * static_cast<double>(e0);
      span.t1_s = 30.0 * static_cast<double>(e0 + len);
      span.channels = {channel};
      span.magnitude = 120.0;  // line noise well above the signal floor
      spec.artifacts.push_back(span);
      for (std::size_t e = e0; e < e0 + len; ++e) bad[channel][e] = true;
    }
    SyntheticSession s = generate_session(spec);
    auto epochs = slice_epochs(s.recording);
    for (const EpochView& e : epochs) {
      ChannelMask mask = select_channels(e, tree);
      for (int ch = 0; ch < 6; ++ch) {
        if (bad[ch][e.index]) {
          ++bad_total;
          if (!mask[ch]) ++bad_rejected;
        } else {
          ++clean_total;
          if (!mask[ch]) ++clean_rejected;
        }
      }
      // Dynamic derivation set must contain the contralateral set.
      auto dyn = apply_scheme(e, mask, ReferencingScheme::Dynamic);
      auto con = apply_scheme(e, mask, ReferencingScheme::ContralateralBe);
      for (const auto& d : con) {
        bool found = false;
        for (const auto& g : dyn) found = found || g.name == d.name;
        inclusion = inclusion && found;
      }
    }
  }
  double recall = static_cast<double>(bad_rejected) / static_cast<double>(bad_total);
  double false_rej =
      static_cast<double>(clean_rejected) / static_cast<double>(clean_total);
  c.expect(recall >= 0.95, "rejection recall " + fmt(recall) + " < 0.95");
  c.expect(false_rej <= 0.05, "false rejection " + fmt(false_rej) + " > 0.05");
  c.expect(inclusion, "dynamic set did not contain the contralateral set");
  c.detail = "recall " + fmt(recall) + ", false rejection " + fmt(false_rej) +
             ", inclusion on every epoch";
  return c;
}

// ---------------------------------------------------------------------------
// 7. Gap ablation ordering
// ---------------------------------------------------------------------------

Check criterion_gap_ablation() {
  Check c;
  std::vector<GapAblationInput> sessions;
  std::vector<std::pair<Hypnogram, Hypnogram>> corpus;

  // SML-only pipeline: a tree that rejects everything forces the fallback.
  QualityTree reject_all;
  reject_all.nodes.push_back({-1, 0.0, -1, -1, 0});

  for (int night = 0; night < 3; ++night) {
    SessionSpec spec;
    spec.seed = 5000 + static_cast<std::uint64_t>(night);
    spec.n_epochs = 960;
    spec.sol_epoch = 40;
    SyntheticSession s = generate_session(spec);

    StagedSession primary = stage_session(s.recording, PipelineConfig{});

    PipelineConfig sml_only;
    sml_only.quality_tree = reject_all;
    StagedSession secondary = stage_session(s.recording, sml_only);
    // The very first epoch has no 60 s context; backfill from its neighbor.
    std::vector<SleepStage> sml_stages = secondary.hypnogram.stages;
    for (std::size_t e = 0; e < sml_stages.size(); ++e)
      if (sml_stages[e] == SleepStage::Unscored)
        sml_stages[e] = e > 0 ? sml_stages[e - 1] : SleepStage::Wake;

    GapAblationInput in;
    in.truth = s.truth.hypnogram;
    in.primary = primary.hypnogram;
    in.secondary = std::move(sml_stages);
    sessions.push_back(std::move(in));
    corpus.emplace_back(s.truth.hypnogram, primary.hypnogram);
  }
  HmmParams params = estimate_hmm(corpus);

  std::vector<std::size_t> gaps{10, 30, 60, 120, 150, 180, 240, 360, 480};
  auto curves = gap_ablation(sessions, gaps, 50, params, 0xC7);
  std::string summary;
  for (const auto& pt : curves) {
    summary += std::to_string(pt.gap_len) + ":" +
               fmt(pt.accuracy_sml_smooth) + "/" +
               fmt(pt.accuracy_smooth_only) + " ";
    if (pt.gap_len > 150)
      c.expect(pt.accuracy_sml_smooth >= pt.accuracy_smooth_only,
               "ordering violated at gap " + std::to_string(pt.gap_len));
  }
  c.detail = summary;
  return c;
}

// ---------------------------------------------------------------------------
// 8. Bandit convergence
// ---------------------------------------------------------------------------

Check criterion_bandit() {
  Check c;
  // Hand-checked conjugate update.
  ArmPosterior hand = acr_update(ArmPosterior{0.0, 100.0, 0}, 2.0, 1.0);
  c.expect(std::abs(hand.mu - 200.0 / 101.0) < 1e-12, "mu' != 200/101");
  c.expect(std::abs(hand.sigma2 - 100.0 / 101.0) < 1e-12, "sigma2' != 100/101");

  const std::vector<double> means{2.0, 0.5, 0.5};
  std::vector<ArmPosterior> posteriors(3, ArmPosterior{0.0, 100.0, 0});
  Rng rng(0xC8);
  int last_best = 0;
  bool variance_monotone = true;
  for (int s = 0; s < 500; ++s) {
    int arm = acr_select(posteriors, rng);
    double reward = means[static_cast<std::size_t>(arm)] + rng.normal();
    double before = posteriors[static_cast<std::size_t>(arm)].sigma2;
    posteriors[static_cast<std::size_t>(arm)] =
        acr_update(posteriors[static_cast<std::size_t>(arm)], reward, 1.0);
    variance_monotone =
        variance_monotone &&
        posteriors[static_cast<std::size_t>(arm)].sigma2 < before;
    if (s >= 400 && arm == 0) ++last_best;
  }
  c.expect(variance_monotone, "posterior variance did not strictly decrease");
  double frac = last_best / 100.0;
  c.expect(frac >= 0.80,
           "best-arm frequency " + fmt(frac) + " over sessions 401-500");
  c.detail = "best-arm frequency " + fmt(frac) + " in sessions 401-500";
  return c;
}

// ---------------------------------------------------------------------------
// 9. Controller contract over a grid of trajectories
// ---------------------------------------------------------------------------

Check criterion_controller() {
  Check c;
  StimTimeline tl;

  // Grid: no-sleep plus onsets at epochs 4..96.
  std::vector<std::optional<std::size_t>> onsets;
  onsets.push_back(std::nullopt);
  for (std::size_t e = 4; e <= 96; e += 4) onsets.push_back(e);

  for (auto onset : onsets) {
    ControllerState state;
    SolDetector det(2);
    std::vector<ControllerAction> all;
    bool off_seen = false;
    bool action_after_off = false;
    for (std::size_t epoch = 0; epoch < 120; ++epoch) {
      SleepStage stage =
          onset && epoch >= *onset ? SleepStage::Light : SleepStage::Wake;
      auto fired = det.feed(stage, epoch);
      double t = 30.0 * static_cast<double>(epoch + 1);
      auto acts = controller_step(state, fired, t, tl);
      if (off_seen && !acts.empty()) action_after_off = true;
      all.insert(all.end(), acts.begin(), acts.end());
      if (state.phase == StimPhase::Off) off_seen = true;
    }
    c.expect(off_seen, "controller never reached Off");
    c.expect(!action_after_off, "actions emitted after Off");
    double stop_t = -1.0;
    for (const auto& a : all)
      if (a.action == "stop") stop_t = a.t;
    if (!onset) {
      c.expect(stop_t == 3000.0, "no-sleep stop at " + fmt(stop_t));
    } else {
      double detect_t = 30.0 * static_cast<double>(*onset + 2);
      double expect_stop = std::min(detect_t + tl.fade_s, tl.hard_stop_s);
      c.expect(std::abs(stop_t - expect_stop) < 1e-9,
               "stop at " + fmt(stop_t) + ", expected " + fmt(expect_stop));
      c.expect(stop_t - detect_t <= 30.0 + 1e-9,
               "stop later than one epoch after detection");
    }
    c.expect(state.vol_bm == 0.0 && state.vol_gbv == 0.0 && state.vol_rtv == 0.0,
             "volumes nonzero after Off");
  }

  // ACS window: slopes flat/rising/falling over full sessions; a switch must
  // never be possible at or past minute 20.
  for (double slope : {-1.0, 0.0, 0.3, 2.0}) {
    PoAsState poas;
    double last_switch = 0.0;
    bool late_switch = false;
    for (int epoch = 1; epoch <= 100; ++epoch) {
      double t = 30.0 * epoch;
      poas.history.emplace_back(t, 30.0 + slope * t / 60.0);
      if (acs_should_switch(poas, t, last_switch, AcsConfig{})) {
        if (t >= 20.0 * 60.0) late_switch = true;
        last_switch = t;
      }
    }
    c.expect(!late_switch, "ACS fired at/after minute 20");
  }
  if (c.ok)
    c.detail = std::to_string(onsets.size()) +
               " onset trajectories + 4 PoAs slope profiles";
  return c;
}

// ---------------------------------------------------------------------------
// 10. Metric formulas
// ---------------------------------------------------------------------------

Check criterion_metric_formulas() {
  Check c;
  Rng rng(0xCA);

  Hypnogram h;
  for (int e = 0; e < 500; ++e)
    h.stages.push_back(static_cast<SleepStage>(rng.uniform_index(4)));
  c.expect(std::abs(cohens_kappa(confusion(h, h)) - 1.0) < 1e-12,
           "kappa of identical hypnograms != 1");

  Hypnogram a, b;
  for (int e = 0; e < 10000; ++e) {
    a.stages.push_back(static_cast<SleepStage>(rng.uniform_index(4)));
    b.stages.push_back(static_cast<SleepStage>(rng.uniform_index(4)));
  }
  double k_indep = cohens_kappa(confusion(a, b));
  c.expect(std::abs(k_indep) <= 0.05,
           "independent-scorer kappa " + fmt(k_indep));

  c.expect(std::abs(kappa_from_rates(0.80, 0.50) - 0.60) < 1e-12,
           "hand kappa case failed");

  for (int trial = 0; trial < 1000; ++trial) {
    Hypnogram r;
    std::size_t n = 10 + rng.uniform_index(400);
    for (std::size_t e = 0; e < n; ++e)
      r.stages.push_back(static_cast<SleepStage>(rng.uniform_index(5)));
    SleepMacros m = sleep_macros(r, r.duration_min());
    if (std::abs(m.light_min + m.deep_min + m.rem_min - m.tst_min) > 1e-12) {
      c.expect(false, "partition identity violated");
      break;
    }
  }

  std::vector<std::pair<double, double>> pairs;
  for (int i = 1; i <= 20; ++i)
    pairs.emplace_back(static_cast<double>(i), 2.0 * i);
  BlandAltman ba = bland_altman(pairs);
  c.expect(ba.mean_ratio == 0.5, "b=2a mean ratio " + fmt(ba.mean_ratio));

  if (c.ok)
    c.detail = "kappa identity/independence/hand case, 1000 partitions, "
               "exact ratio";
  return c;
}

// ---------------------------------------------------------------------------
// 11. DSP properties
// ---------------------------------------------------------------------------

Check criterion_dsp() {
  Check c;
  const double fs = 250.0;
  Rng rng(0xCB);

  // Clamp.
  std::vector<double> spiky(7500);
  for (double& v : spiky) v = rng.normal(0.0, 400.0);
  auto clamped = preprocess(spiky, fs);
  bool inside = true;
  for (double v : clamped) inside = inside && std::abs(v) <= 500.0 + 1e-9;
  c.expect(inside, "preprocess exceeded the clamp");

  // Mains attenuation.
  std::vector<double> mains(7500);
  for (std::size_t i = 0; i < mains.size(); ++i)
    mains[i] = 25.0 * std::sin(2.0 * M_PI * 50.0 * static_cast<double>(i) / fs);
  auto filtered = preprocess(mains, fs);
  double in_rms = 0.0, out_rms = 0.0;
  for (double v : mains) in_rms += v * v;
  for (double v : filtered) out_rms += v * v;
  double attenuation = 1.0 - std::sqrt(out_rms / in_rms);
  c.expect(attenuation >= 0.95,
           "50 Hz attenuation " + fmt(100.0 * attenuation) + "% < 95%");

  // RSP of a pure alpha tone.
  std::vector<double> alpha(7500);
  for (std::size_t i = 0; i < alpha.size(); ++i)
    alpha[i] = 20.0 * std::sin(2.0 * M_PI * 10.0 * static_cast<double>(i) / fs);
  RspBands rsp = relative_spectral_power(alpha, fs);
  c.expect(rsp.alpha >= 0.95, "alpha RSP " + fmt(rsp.alpha) + " < 0.95");

  // Zero-weight forward pass is exactly uniform.
  PmlWeights zeros = PmlWeights::zeros();
  FeatureHistory hist;
  FeatureVector38 fv{};
  fv[0] = 1.0;
  hist.push(fv);
  EpochSpectrogram sg = epoch_spectrogram(alpha, fs);
  StageDistribution d = pml_forward(sg, hist, zeros);
  c.expect(d.p[0] == 0.25 && d.p[1] == 0.25 && d.p[2] == 0.25 && d.p[3] == 0.25,
           "zero-weight output not exactly uniform");

  // Latent contract enforced at load.
  auto dir = fs::temp_directory_path() / "hypnos_acceptance_weights";
  fs::create_directories(dir);
  write_tensors(dir / "good.tensors", PmlWeights::seeded(5).to_tensors());
  bool good_loads = true;
  try {
    PmlWeights loaded = PmlWeights::load(dir / "good.tensors");
    good_loads = loaded.latent_dim() == kPmlLatentDim;
  } catch (const Error&) {
    good_loads = false;
  }
  c.expect(good_loads, "valid weight file failed to load");
  TensorMap broken = PmlWeights::seeded(6).to_tensors();
  broken["head.weight"].shape = {4, 900};
  broken["head.weight"].data.assign(4 * 900, 0.0);
  write_tensors(dir / "bad.tensors", broken);
  bool rejected = false;
  try {
    PmlWeights::load(dir / "bad.tensors");
  } catch (const Error& e) {
    rejected = e.code() == ErrorCode::ShapeMismatch;
  }
  c.expect(rejected, "mismatched weight file was not rejected");
  fs::remove_all(dir);

  if (c.ok)
    c.detail = "clamp, " + fmt(100.0 * attenuation) + "% mains attenuation, " +
               "alpha RSP " + fmt(rsp.alpha) + ", exact uniform, 928 check";
  return c;
}

// ---------------------------------------------------------------------------
// 12. CLI determinism
// ---------------------------------------------------------------------------

std::string file_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli_path + " " + args + " >/dev/null 2>&1";
  return std::system(cmd.c_str());
}

Check criterion_cli_determinism() {
  Check c;
  if (g_cli_path.empty()) {
    c.expect(false, "cli path not provided");
    return c;
  }
  auto root = fs::temp_directory_path() / "hypnos_acceptance_cli";
  fs::remove_all(root);
  fs::create_directories(root);

  {
    std::ofstream spec(root / "session.spec");
    spec << "seed=7\nn_epochs=20\nsol_epoch=6\n";
    std::ofstream cfg(root / "run.cfg");
    cfg << "seed=7\n";
  }

  auto run_all = [&](const std::string& tag) {
    fs::path d = root / tag;
    fs::create_directories(d);
    int rc = 0;
    rc |= run_cli("simulate " + (root / "session.spec").string() + " --out " +
                  (d / "rec").string());
    rc |= run_cli("stage " + (d / "rec").string() + " --out " +
                  (d / "pred.hyp").string());
    rc |= run_cli("fit-hmm --truth " + (d / "pred.hyp").string() +
                  " --observed " + (d / "pred.hyp").string() + " --out " +
                  (d / "params.txt").string());
    rc |= run_cli("smooth --params " + (d / "params.txt").string() + " --in " +
                  (d / "pred.hyp").string() + " --out " +
                  (d / "smooth.hyp").string());
    rc |= run_cli("vitals " + (d / "rec").string() + " --out " +
                  (d / "vitals.csv").string());
    rc |= run_cli("evaluate --pred " + (d / "pred.hyp").string() + " --truth " +
                  (d / "smooth.hyp").string() + " --out " +
                  (d / "report.csv").string());
    rc |= run_cli("closed-loop " + (d / "rec").string() + " --config " +
                  (root / "run.cfg").string() + " --out " +
                  (d / "actions.csv").string() + " --poas " +
                  (d / "poas.csv").string());
    rc |= run_cli("bandit-sim --contents 3 --sessions 200 --seed 7 --out " +
                  (d / "bandit.csv").string());
    return rc;
  };

  int rc1 = run_all("a");
  int rc2 = run_all("b");
  c.expect(rc1 == 0 && rc2 == 0, "cli run failed");

  const char* files[] = {"rec/exg.csv",  "rec/ppg.csv",  "rec/imu.csv",
                         "rec/truth.json", "rec/truth.hyp", "pred.hyp",
                         "pred.hyp.prov.csv",
                         "params.txt",   "smooth.hyp",   "vitals.csv",
                         "report.csv",   "actions.csv",  "poas.csv",
                         "bandit.csv"};
  for (const char* f : files) {
    std::string a = file_bytes(root / "a" / f);
    std::string b = file_bytes(root / "b" / f);
    c.expect(!a.empty(), std::string(f) + " missing or empty");
    c.expect(a == b, std::string(f) + " differs between runs");
  }
  fs::remove_all(root);
  if (c.ok) c.detail = "14 output files byte-identical across reruns";
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) g_cli_path = argv[1];

  struct Entry {
    const char* name;
    std::function<Check()> run;
  };
  std::vector<Entry> entries = {
      {"viterbi-oracle-equivalence", criterion_viterbi_oracle},
      {"smoothing-completeness", criterion_smoothing_completeness},
      {"baseline-staging-accuracy", criterion_baseline_staging},
      {"sol-estimation", criterion_sol_estimation},
      {"vitals-round-trip", criterion_vitals_round_trip},
      {"channel-gating", criterion_channel_gating},
      {"gap-ablation-ordering", criterion_gap_ablation},
      {"bandit-convergence", criterion_bandit},
      {"controller-contract", criterion_controller},
      {"metric-formulas", criterion_metric_formulas},
      {"dsp-properties", criterion_dsp},
      {"cli-determinism", criterion_cli_determinism},
  };

  int only = 0;
  if (argc > 2) only = std::atoi(argv[2]);

  bool all_ok = true;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (only > 0 && static_cast<int>(i + 1) != only) continue;
    auto t0 = Clock::now();
    Check c;
    try {
      c = entries[i].run();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%2zu/12] %-28s %s (%.1f s)%s%s\n", i + 1, entries[i].name,
                c.ok ? "PASS" : "FAIL", seconds_since(t0),
                c.detail.empty() ? "" : " -- ", c.detail.c_str());
    std::fflush(stdout);
    all_ok = all_ok && c.ok;
  }
  return all_ok ? 0 : 1;
}
