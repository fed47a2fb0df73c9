#include "hypnos/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/errors.hpp"
#include "hypnos/rng.hpp"
#include "hypnos/smoothing.hpp"

namespace hypnos {

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t n = 0;
  for (const auto& row : counts)
    for (std::uint64_t c : row) n += c;
  return n;
}

std::uint64_t ConfusionMatrix::diagonal() const {
  std::uint64_t n = 0;
  for (int i = 0; i < 4; ++i) n += counts[i][i];
  return n;
}

ConfusionMatrix confusion(const Hypnogram& pred, const Hypnogram& truth) {
  if (pred.size() != truth.size())
    raise(ErrorCode::LengthMismatch, "pred/truth lengths differ");
  ConfusionMatrix cm;
  for (std::size_t e = 0; e < pred.size(); ++e) {
    const bool ps = is_scored(pred[e]);
    const bool ts = is_scored(truth[e]);
    if (!ps) ++cm.unscored_pred;
    if (!ts) ++cm.unscored_truth;
    if (ps && ts)
      ++cm.counts[static_cast<int>(truth[e])][static_cast<int>(pred[e])];
  }
  return cm;
}

Metrics metrics(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) raise(ErrorCode::EmptyMatrix, "no jointly scored epochs");

  Metrics m;
  m.accuracy = static_cast<double>(cm.diagonal()) / static_cast<double>(total);

  double sum_p_all = 0.0, sum_r_all = 0.0, sum_f_all = 0.0;
  double sum_p_pres = 0.0, sum_r_pres = 0.0, sum_f_pres = 0.0;
  int n_present = 0;
  for (int s = 0; s < 4; ++s) {
    std::uint64_t tp = cm.counts[s][s];
    std::uint64_t truth_total = 0, pred_total = 0;
    for (int o = 0; o < 4; ++o) {
      truth_total += cm.counts[s][o];
      pred_total += cm.counts[o][s];
    }
    ClassMetrics& c = m.per_class[s];
    if (pred_total == 0 || truth_total == 0) c.degenerate = true;
    c.precision = pred_total
                      ? static_cast<double>(tp) / static_cast<double>(pred_total)
                      : 0.0;
    c.recall = truth_total
                   ? static_cast<double>(tp) / static_cast<double>(truth_total)
                   : 0.0;
    c.f1 = (c.precision + c.recall) > 0.0
               ? 2.0 * c.precision * c.recall / (c.precision + c.recall)
               : 0.0;
    sum_p_all += c.precision;
    sum_r_all += c.recall;
    sum_f_all += c.f1;
    if (truth_total > 0) {
      sum_p_pres += c.precision;
      sum_r_pres += c.recall;
      sum_f_pres += c.f1;
      ++n_present;
    }
  }
  m.macro_precision_all = sum_p_all / 4.0;
  m.macro_recall_all = sum_r_all / 4.0;
  m.macro_f1_all = sum_f_all / 4.0;
  if (n_present > 0) {
    m.macro_precision_present = sum_p_pres / n_present;
    m.macro_recall_present = sum_r_pres / n_present;
    m.macro_f1_present = sum_f_pres / n_present;
  }
  return m;
}

double kappa_from_rates(double observed_agreement, double expected_agreement) {
  if (expected_agreement >= 1.0)
    raise(ErrorCode::DegenerateMarginals, "expected agreement is 1");
  return (observed_agreement - expected_agreement) / (1.0 - expected_agreement);
}

double cohens_kappa(const ConfusionMatrix& cm) {
  const std::uint64_t total = cm.total();
  if (total == 0) raise(ErrorCode::EmptyMatrix, "no jointly scored epochs");
  const double n = static_cast<double>(total);
  double po = static_cast<double>(cm.diagonal()) / n;
  double pe = 0.0;
  for (int s = 0; s < 4; ++s) {
    double truth_total = 0.0, pred_total = 0.0;
    for (int o = 0; o < 4; ++o) {
      truth_total += static_cast<double>(cm.counts[s][o]);
      pred_total += static_cast<double>(cm.counts[o][s]);
    }
    pe += (truth_total / n) * (pred_total / n);
  }
  return kappa_from_rates(po, pe);
}

SleepMacros sleep_macros(const Hypnogram& h, double tib_min, int sol_run_len) {
  SleepMacros m;
  m.tib_min = tib_min;
  m.light_min = static_cast<double>(h.count(SleepStage::Light)) * 0.5;
  m.deep_min = static_cast<double>(h.count(SleepStage::Deep)) * 0.5;
  m.rem_min = static_cast<double>(h.count(SleepStage::Rem)) * 0.5;
  m.tst_min = m.light_min + m.deep_min + m.rem_min;
  m.se_percent = tib_min > 0.0 ? 100.0 * m.tst_min / tib_min : 0.0;
  auto sol = sol_from_hypnogram(h, sol_run_len);
  if (sol) {
    m.sol_min = static_cast<double>(*sol) * 0.5;
  } else {
    m.sol_min = tib_min;  // no-sleep convention
    m.sol_defaulted = true;
  }
  if (tib_min > 0.0) {
    m.light_pct_tib = 100.0 * m.light_min / tib_min;
    m.deep_pct_tib = 100.0 * m.deep_min / tib_min;
    m.rem_pct_tib = 100.0 * m.rem_min / tib_min;
  }
  return m;
}

BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 2)
    raise(ErrorCode::TooShort, "bland-altman needs >= 2 pairs");
  BlandAltman ba;
  ba.points.reserve(pairs.size());
  double sum = 0.0;
  for (const auto& [a, b] : pairs) {
    if (!(a > 0.0) || !(b > 0.0))
      raise(ErrorCode::NonPositiveValue, "bland-altman values must be > 0");
    double mean = 0.5 * (a + b);
    double ratio = a / b;
    ba.points.emplace_back(mean, ratio);
    sum += ratio;
  }
  const double n = static_cast<double>(pairs.size());
  ba.mean_ratio = sum / n;
  double var = 0.0;
  for (const auto& [mean, ratio] : ba.points)
    var += (ratio - ba.mean_ratio) * (ratio - ba.mean_ratio);
  double sd = std::sqrt(var / n);
  ba.lower_limit = ba.mean_ratio - 1.96 * sd;
  ba.upper_limit = ba.mean_ratio + 1.96 * sd;
  return ba;
}

BandAgreement rsp_agreement(const std::vector<double>& a,
                            const std::vector<double>& b) {
  if (a.size() != b.size())
    raise(ErrorCode::LengthMismatch, "series lengths differ");
  if (a.size() < 2) raise(ErrorCode::TooShort, "need >= 2 samples");
  BandAgreement out;
  const double n = static_cast<double>(a.size());
  double mae = 0.0, ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mae += std::abs(a[i] - b[i]);
    ma += a[i];
    mb += b[i];
  }
  out.mae = mae / n;
  ma /= n;
  mb /= n;
  double num = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (!(va > 0.0) || !(vb > 0.0)) {
    out.zero_variance = true;
    out.pearson_r = 0.0;
    return out;
  }
  out.pearson_r = num / std::sqrt(va * vb);
  return out;
}

std::vector<GapAblationPoint> gap_ablation(
    const std::vector<GapAblationInput>& sessions,
    const std::vector<std::size_t>& gap_lens, int trials,
    const HmmParams& params, std::uint64_t seed) {
  if (sessions.empty()) raise(ErrorCode::EmptyCorpus, "no sessions");
  for (const auto& s : sessions) {
    if (s.truth.size() != s.primary.size() ||
        s.secondary.size() != s.primary.size())
      raise(ErrorCode::LengthMismatch, "session arrays differ in length");
  }

  std::vector<GapAblationPoint> out;
  for (std::size_t gap : gap_lens) {
    GapAblationPoint point;
    point.gap_len = gap;
    double acc_sml = 0.0, acc_smooth = 0.0;
    std::uint64_t n_trials = 0;
    for (int trial = 0; trial < trials; ++trial) {
      for (std::size_t si = 0; si < sessions.size(); ++si) {
        const auto& s = sessions[si];
        if (gap > s.primary.size())
          raise(ErrorCode::GapLongerThanSession,
                "gap of " + std::to_string(gap) + " epochs exceeds session");
        Rng rng(seed ^ (0x517cc1b727220a95ULL * (si + 1)) ^
                (0x2545f4914f6cdd1dULL * static_cast<std::uint64_t>(trial + 1)) ^
                gap);
        std::size_t start = static_cast<std::size_t>(
            rng.uniform_index(s.primary.size() - gap + 1));

        Hypnogram blanked = s.primary;
        for (std::size_t e = start; e < start + gap; ++e)
          blanked.stages[e] = SleepStage::Unscored;

        Hypnogram with_sml = blanked;
        for (std::size_t e = start; e < start + gap; ++e)
          with_sml.stages[e] = s.secondary[e];

        Hypnogram rec_sml = smooth(with_sml, params);
        Hypnogram rec_smooth = smooth(blanked, params);

        std::size_t ok_sml = 0, ok_smooth = 0;
        for (std::size_t e = 0; e < s.truth.size(); ++e) {
          if (rec_sml[e] == s.truth[e]) ++ok_sml;
          if (rec_smooth[e] == s.truth[e]) ++ok_smooth;
        }
        acc_sml += static_cast<double>(ok_sml) /
                   static_cast<double>(s.truth.size());
        acc_smooth += static_cast<double>(ok_smooth) /
                      static_cast<double>(s.truth.size());
        ++n_trials;
      }
    }
    point.accuracy_sml_smooth = acc_sml / static_cast<double>(n_trials);
    point.accuracy_smooth_only = acc_smooth / static_cast<double>(n_trials);
    out.push_back(point);
  }
  return out;
}

}  // namespace hypnos
