#include <doctest.h>

#include <cmath>

#include "hypnos/errors.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/rng.hpp"
#include "hypnos/smoothing.hpp"

using namespace hypnos;

namespace {

Hypnogram from_tokens(const std::string& tokens) {
  Hypnogram h;
  for (char c : tokens) h.stages.push_back(stage_from_token(c));
  return h;
}

Hypnogram random_hyp(Rng& rng, std::size_t n, bool allow_unscored = false) {
  Hypnogram h;
  for (std::size_t e = 0; e < n; ++e)
    h.stages.push_back(
        static_cast<SleepStage>(rng.uniform_index(allow_unscored ? 5 : 4)));
  return h;
}

}  // namespace

TEST_CASE("confusion counts scored epochs and tallies unscored") {
  Rng rng(1);
  Hypnogram truth = random_hyp(rng, 100);
  ConfusionMatrix cm = confusion(truth, truth);
  CHECK(cm.diagonal() == 100);
  CHECK(cm.total() == 100);

  Hypnogram wake = from_tokens(std::string(50, 'W'));
  Hypnogram light = from_tokens(std::string(50, 'L'));
  cm = confusion(wake, light);
  CHECK(cm.counts[1][0] == 50);
  CHECK(cm.diagonal() == 0);

  Hypnogram with_u = from_tokens("WWULU");
  cm = confusion(with_u, from_tokens("WWWWW"));
  CHECK(cm.unscored_pred == 2);
  CHECK(cm.total() == 3);

  CHECK_THROWS_AS(confusion(wake, from_tokens("W")), Error);
}

TEST_CASE("metrics match hand arithmetic on an embedded 2x2 matrix") {
  ConfusionMatrix cm;
  cm.counts[0][0] = 8;
  cm.counts[0][1] = 2;
  cm.counts[1][0] = 1;
  cm.counts[1][1] = 9;
  Metrics m = metrics(cm);
  CHECK(m.accuracy == doctest::Approx(17.0 / 20.0));
  CHECK(m.per_class[0].precision == doctest::Approx(8.0 / 9.0));
  CHECK(m.per_class[0].recall == doctest::Approx(8.0 / 10.0));
  CHECK(m.per_class[1].precision == doctest::Approx(9.0 / 11.0));
  CHECK(m.per_class[1].recall == doctest::Approx(9.0 / 10.0));
  double f1_w = 2.0 * (8.0 / 9.0) * 0.8 / (8.0 / 9.0 + 0.8);
  CHECK(m.per_class[0].f1 == doctest::Approx(f1_w));
  // Deep and REM are absent: flagged, reported as zero, excluded from the
  // present-class macro.
  CHECK(m.per_class[2].degenerate);
  CHECK(m.per_class[2].f1 == 0.0);
  CHECK(m.macro_f1_present ==
        doctest::Approx((m.per_class[0].f1 + m.per_class[1].f1) / 2.0));
  CHECK(m.macro_f1_all ==
        doctest::Approx((m.per_class[0].f1 + m.per_class[1].f1) / 4.0));

  ConfusionMatrix empty;
  CHECK_THROWS_AS(metrics(empty), Error);
}

TEST_CASE("metrics and confusion agree with a naive tally") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    Hypnogram truth = random_hyp(rng, 60, true);
    Hypnogram pred = random_hyp(rng, 60, true);
    ConfusionMatrix cm = confusion(pred, truth);
    // Naive reference tally.
    std::uint64_t agree = 0, total = 0;
    for (std::size_t e = 0; e < 60; ++e) {
      if (!is_scored(pred[e]) || !is_scored(truth[e])) continue;
      ++total;
      if (pred[e] == truth[e]) ++agree;
    }
    CHECK(cm.total() == total);
    CHECK(cm.diagonal() == agree);
    if (total > 0) {
      Metrics m = metrics(cm);
      CHECK(m.accuracy ==
            doctest::Approx(static_cast<double>(agree) / total).epsilon(1e-12));
    }
  }
}

TEST_CASE("kappa of identical hypnograms is one") {
  Rng rng(2);
  Hypnogram h = random_hyp(rng, 300);
  CHECK(cohens_kappa(confusion(h, h)) == doctest::Approx(1.0));
}

TEST_CASE("kappa hand case and scale invariance") {
  CHECK(kappa_from_rates(0.80, 0.50) == doctest::Approx(0.60));

  ConfusionMatrix cm;
  Rng rng(3);
  for (int s = 0; s < 4; ++s)
    for (int o = 0; o < 4; ++o)
      cm.counts[s][o] = 1 + rng.uniform_index(20);
  double k1 = cohens_kappa(cm);
  ConfusionMatrix scaled = cm;
  for (int s = 0; s < 4; ++s)
    for (int o = 0; o < 4; ++o) scaled.counts[s][o] *= 7;
  CHECK(cohens_kappa(scaled) == doctest::Approx(k1).epsilon(1e-12));
}

TEST_CASE("kappa of independent scorers is near zero") {
  Rng rng(23);
  Hypnogram a = random_hyp(rng, 10000);
  Hypnogram b = random_hyp(rng, 10000);
  double k = cohens_kappa(confusion(a, b));
  CHECK(std::abs(k) <= 0.05);
}

TEST_CASE("kappa degenerates when expected agreement is one") {
  Hypnogram all_w = from_tokens(std::string(30, 'W'));
  CHECK_THROWS_AS(cohens_kappa(confusion(all_w, all_w)), Error);
}

TEST_CASE("sleep macros on hand-built hypnograms") {
  // All-wake 50-minute nap: the no-sleep convention reports SOL = TIB.
  Hypnogram nap = from_tokens(std::string(100, 'W'));
  SleepMacros m = sleep_macros(nap, 50.0);
  CHECK(m.tst_min == 0.0);
  CHECK(m.se_percent == 0.0);
  CHECK(m.sol_defaulted);
  CHECK(m.sol_min == doctest::Approx(50.0));

  // 20 min wake then 30 min light.
  Hypnogram h = from_tokens(std::string(40, 'W') + std::string(60, 'L'));
  m = sleep_macros(h, 50.0);
  CHECK(m.sol_min == doctest::Approx(20.0));
  CHECK(m.tst_min == doctest::Approx(30.0));
  CHECK(m.se_percent == doctest::Approx(60.0));
  CHECK(m.light_min == doctest::Approx(30.0));
  CHECK(m.light_pct_tib == doctest::Approx(60.0));
  CHECK_FALSE(m.sol_defaulted);
}

TEST_CASE("sleep macros partition identity holds") {
  Rng rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    Hypnogram h = random_hyp(rng, 50 + rng.uniform_index(200), true);
    SleepMacros m = sleep_macros(h, h.duration_min());
    CHECK(m.light_min + m.deep_min + m.rem_min == doctest::Approx(m.tst_min));
    CHECK(m.tst_min <= m.tib_min + 1e-9);
  }
}

TEST_CASE("bland-altman ratio analysis") {
  std::vector<std::pair<double, double>> same{{2.0, 2.0}, {3.0, 3.0}, {4.5, 4.5}};
  BlandAltman ba = bland_altman(same);
  CHECK(ba.mean_ratio == doctest::Approx(1.0));
  CHECK(ba.lower_limit == doctest::Approx(1.0));
  CHECK(ba.upper_limit == doctest::Approx(1.0));

  std::vector<std::pair<double, double>> doubled{{1.0, 2.0}, {2.0, 4.0}, {3.0, 6.0}};
  ba = bland_altman(doubled);
  CHECK(ba.mean_ratio == doctest::Approx(0.5));

  // Log-normal ratio noise: limits approach exp(+-1.96 sigma).
  Rng rng(29);
  std::vector<std::pair<double, double>> noisy;
  for (int i = 0; i < 5000; ++i) {
    double a = 10.0 + rng.uniform() * 5.0;
    double ratio = std::exp(rng.normal(0.0, 0.1));
    noisy.emplace_back(a * ratio, a);
  }
  ba = bland_altman(noisy);
  CHECK(ba.upper_limit == doctest::Approx(std::exp(1.96 * 0.1)).epsilon(0.03));
  CHECK(ba.lower_limit == doctest::Approx(std::exp(-1.96 * 0.1)).epsilon(0.04));

  std::vector<std::pair<double, double>> bad{{1.0, 0.0}, {1.0, 1.0}};
  CHECK_THROWS_AS(bland_altman(bad), Error);
}

TEST_CASE("rsp agreement statistics") {
  std::vector<double> a{0.1, 0.2, 0.3, 0.4};
  BandAgreement ag = rsp_agreement(a, a);
  CHECK(ag.mae == doctest::Approx(0.0));
  CHECK(ag.pearson_r == doctest::Approx(1.0));

  std::vector<double> b{0.2, 0.3, 0.4, 0.5};
  ag = rsp_agreement(a, b);
  CHECK(ag.mae == doctest::Approx(0.1));
  CHECK(ag.pearson_r == doctest::Approx(1.0));

  std::vector<double> anti{0.4, 0.3, 0.2, 0.1};
  ag = rsp_agreement(a, anti);
  CHECK(ag.pearson_r == doctest::Approx(-1.0));

  std::vector<double> flat{0.5, 0.5, 0.5, 0.5};
  ag = rsp_agreement(a, flat);
  CHECK(ag.zero_variance);

  CHECK_THROWS_AS(rsp_agreement(a, std::vector<double>{1.0}), Error);
}

TEST_CASE("gap ablation is deterministic and validates gaps") {
  Rng rng(31);
  GapAblationInput s;
  s.truth = random_hyp(rng, 120);
  s.primary = s.truth;
  for (int e = 0; e < 20; ++e)
    s.primary.stages[rng.uniform_index(120)] =
        static_cast<SleepStage>(rng.uniform_index(4));
  s.secondary.assign(120, SleepStage::Light);
  HmmParams p = estimate_hmm({{s.truth, s.primary}});

  auto a = gap_ablation({s}, {0, 10, 40}, 5, p, 77);
  auto b = gap_ablation({s}, {0, 10, 40}, 5, p, 77);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].accuracy_sml_smooth == b[i].accuracy_sml_smooth);
    CHECK(a[i].accuracy_smooth_only == b[i].accuracy_smooth_only);
  }
  // Zero gap: both modes equal the smoothing of the unmodified prediction.
  CHECK(a[0].accuracy_sml_smooth == doctest::Approx(a[0].accuracy_smooth_only));

  CHECK_THROWS_AS(gap_ablation({s}, {500}, 1, p, 1), Error);
}
