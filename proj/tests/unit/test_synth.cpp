#include <doctest.h>

#include <cmath>

#include "hypnos/errors.hpp"
#include "hypnos/quality.hpp"
#include "hypnos/spectral.hpp"
#include "hypnos/synth.hpp"

using namespace hypnos;

TEST_CASE("generation is deterministic per seed") {
  SessionSpec spec;
  spec.seed = 99;
  spec.n_epochs = 6;
  spec.sol_epoch = 2;
  SyntheticSession a = generate_session(spec);
  SyntheticSession b = generate_session(spec);
  CHECK(a.truth.hypnogram == b.truth.hypnogram);
  CHECK(a.recording.exg[0] == b.recording.exg[0]);
  CHECK(a.recording.ppg[1] == b.recording.ppg[1]);
  CHECK(a.recording.imu[2] == b.recording.imu[2]);

  spec.seed = 100;
  SyntheticSession c = generate_session(spec);
  CHECK(a.recording.exg[0] != c.recording.exg[0]);
}

TEST_CASE("hypnogram plants the onset and tracks stage quotas") {
  SessionSpec spec;
  spec.seed = 11;
  spec.n_epochs = 960;
  spec.sol_epoch = 60;
  Hypnogram h = gen_hypnogram(spec);
  REQUIRE(h.size() == 960);
  for (std::size_t e = 0; e < 60; ++e) CHECK(h[e] == SleepStage::Wake);
  for (int rl : {1, 2, 3})
    CHECK(sol_from_hypnogram(h, rl).value() == 60);

  double sleep = static_cast<double>(h.count(SleepStage::Light) +
                                     h.count(SleepStage::Deep) +
                                     h.count(SleepStage::Rem));
  double light_frac = static_cast<double>(h.count(SleepStage::Light)) / sleep;
  CHECK(light_frac >= 0.50);
  CHECK(light_frac <= 0.60);
  double deep_frac = static_cast<double>(h.count(SleepStage::Deep)) / sleep;
  CHECK(deep_frac == doctest::Approx(0.20 / 0.975).epsilon(0.05));
}

TEST_CASE("infeasible proportions are rejected") {
  SessionSpec spec;
  spec.light_frac = 0.8;
  spec.deep_frac = 0.3;
  CHECK_THROWS_AS(spec.validate(), Error);
}

TEST_CASE("stage recipes produce the expected spectral orderings") {
  SessionSpec spec;
  spec.seed = 21;
  spec.n_epochs = 24;
  spec.sol_epoch = 3;
  SyntheticSession s = generate_session(spec);
  auto epochs = slice_epochs(s.recording);
  int checked = 0, ok = 0;
  for (const auto& e : epochs) {
    RspBands r = relative_spectral_power(e.exg[0], e.fs_exg);
    SleepStage st = s.truth.hypnogram[e.index];
    bool good = true;
    switch (st) {
      case SleepStage::Wake:
        good = r.alpha > r.delta && r.alpha > r.theta && r.alpha > r.beta;
        break;
      case SleepStage::Deep:
        good = r.delta > r.theta && r.delta > r.alpha && r.delta > r.beta;
        break;
      case SleepStage::Rem:
        good = r.theta > r.delta && r.theta > r.alpha && r.theta > r.beta;
        break;
      case SleepStage::Light:
        good = r.alpha < std::max(r.delta, r.theta) && r.delta < 0.75;
        break;
      default:
        break;
    }
    ++checked;
    ok += good ? 1 : 0;
  }
  CHECK(checked == 24);
  CHECK(static_cast<double>(ok) / checked >= 0.98);
}

TEST_CASE("light epochs carry spindles worth of sigma power") {
  SessionSpec spec;
  spec.seed = 33;
  spec.n_epochs = 30;
  spec.sol_epoch = 1;
  SyntheticSession s = generate_session(spec);
  auto epochs = slice_epochs(s.recording);
  for (const auto& e : epochs) {
    if (s.truth.hypnogram[e.index] != SleepStage::Light) continue;
    WelchSpectrum sp = welch_spectrum(e.exg[0], e.fs_exg, 2.0, 20.0, 0.0);
    // Spindle band power should clearly beat its non-spindle neighborhood.
    double sigma = sp.band_power(12.5, 15.0);
    double neighbor = sp.band_power(15.5, 18.0);
    CHECK(sigma > 2.0 * neighbor);
  }
}

TEST_CASE("flatline artifact makes exactly the target channel unscorable") {
  SessionSpec spec;
  spec.seed = 44;
  spec.n_epochs = 10;
  spec.sol_epoch = 2;
  spec.artifacts.push_back(
      {"flatline", 90.0, 180.0, {static_cast<int>(ExgChannel::FhL)}, 0.0});
  SyntheticSession s = generate_session(spec);
  REQUIRE(s.truth.artifacts.size() == 1);

  QualityTree tree = QualityTree::default_tree();
  auto epochs = slice_epochs(s.recording);
  for (const auto& e : epochs) {
    ChannelMask m = select_channels(e, tree);
    bool in_span = e.index >= 3 && e.index < 6;
    CHECK(m[static_cast<int>(ExgChannel::FhL)] == !in_span);
    for (int c = 1; c < kNumExgChannels; ++c) CHECK(m[c]);
  }
}

TEST_CASE("artifact spans outside the session are rejected") {
  SessionSpec spec;
  spec.seed = 1;
  spec.n_epochs = 4;
  SyntheticSession s = generate_session(spec);
  ArtifactSpan bad{"flatline", 100.0, 4000.0, {}, 0.0};
  CHECK_THROWS_AS(inject_artifact(s.recording, bad), Error);
  ArtifactSpan unknown{"sparkle", 0.0, 10.0, {}, 0.0};
  CHECK_THROWS_AS(inject_artifact(s.recording, unknown), Error);
}

TEST_CASE("truth sidecar round trips through JSON") {
  SessionSpec spec;
  spec.seed = 5;
  spec.n_epochs = 8;
  spec.sol_epoch = 2;
  spec.posture_schedule = {{0, Posture::Supine}, {4, Posture::LeftSide}};
  spec.artifacts.push_back({"line_noise", 30.0, 60.0, {0, 1}, 25.0});
  SyntheticSession s = generate_session(spec);
  std::string text = truth_to_json(s.truth);
  SessionTruth back = truth_from_json(text);
  CHECK(back.hypnogram == s.truth.hypnogram);
  CHECK(back.sol_epoch == s.truth.sol_epoch);
  CHECK(back.hr_bpm_per_5s.size() == s.truth.hr_bpm_per_5s.size());
  CHECK(back.posture_changes == s.truth.posture_changes);
  REQUIRE(back.artifacts.size() == 1);
  CHECK(back.artifacts[0].kind == "line_noise");
  CHECK(back.artifacts[0].channels == std::vector<int>{0, 1});
}

TEST_CASE("planted vitals appear in the truth logs") {
  SessionSpec spec;
  spec.seed = 6;
  spec.n_epochs = 8;
  spec.sol_epoch = 1;
  spec.hr_const_bpm = 75.0;
  spec.rr_const_brpm = 16.0;
  SyntheticSession s = generate_session(spec);
  REQUIRE_FALSE(s.truth.hr_bpm_per_5s.empty());
  for (double hr : s.truth.hr_bpm_per_5s) CHECK(hr == doctest::Approx(75.0));
  for (double rr : s.truth.rr_brpm_per_60s) CHECK(rr == doctest::Approx(16.0));
}
