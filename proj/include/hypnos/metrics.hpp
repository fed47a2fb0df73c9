#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "hypnos/hypnogram.hpp"

namespace hypnos {

// Counts over epochs where both hypnograms are scored; unscored epochs are
// tallied separately per side.
struct ConfusionMatrix {
  std::array<std::array<std::uint64_t, 4>, 4> counts{};  // truth row, pred col
  std::uint64_t unscored_pred = 0;
  std::uint64_t unscored_truth = 0;

  std::uint64_t total() const;
  std::uint64_t diagonal() const;
};

ConfusionMatrix confusion(const Hypnogram& pred, const Hypnogram& truth);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // zero-denominator class, reported as 0
};

struct Metrics {
  double accuracy = 0.0;
  std::array<ClassMetrics, 4> per_class{};
  // Averages over all four classes and over classes present in the truth.
  double macro_precision_all = 0.0, macro_recall_all = 0.0, macro_f1_all = 0.0;
  double macro_precision_present = 0.0, macro_recall_present = 0.0,
         macro_f1_present = 0.0;
};

Metrics metrics(const ConfusionMatrix& cm);

// Chance-corrected agreement; throws DegenerateMarginals when expected
// agreement is 1.
double cohens_kappa(const ConfusionMatrix& cm);
double kappa_from_rates(double observed_agreement, double expected_agreement);

// Sleep macro variables. SOL falls back to TIB (flagged) for no-sleep naps.
struct SleepMacros {
  double tib_min = 0.0;
  double sol_min = 0.0;
  bool sol_defaulted = false;
  double tst_min = 0.0;
  double se_percent = 0.0;
  double light_min = 0.0, light_pct_tib = 0.0;
  double deep_min = 0.0, deep_pct_tib = 0.0;
  double rem_min = 0.0, rem_pct_tib = 0.0;
};

SleepMacros sleep_macros(const Hypnogram& h, double tib_min, int sol_run_len = 2);

// Ratio-form Bland-Altman: per pair, mean (a+b)/2 against ratio a/b; limits
// of agreement are mean(ratio) +- 1.96 sd(ratio).
struct BlandAltman {
  double mean_ratio = 0.0;
  double lower_limit = 0.0;
  double upper_limit = 0.0;
  std::vector<std::pair<double, double>> points;  // (mean, ratio)
};

BlandAltman bland_altman(const std::vector<std::pair<double, double>>& pairs);

struct BandAgreement {
  double mae = 0.0;
  double pearson_r = 0.0;
  bool zero_variance = false;
};

BandAgreement rsp_agreement(const std::vector<double>& a,
                            const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Gap ablation: blank a contiguous segment of the per-epoch predictions and
// recover it either with the secondary scorer plus smoothing or with
// smoothing alone.
// ---------------------------------------------------------------------------

struct GapAblationInput {
  Hypnogram truth;
  Hypnogram primary;              // real-time output, no gap applied yet
  std::vector<SleepStage> secondary;  // per-epoch SML stage (fallback source)
};

struct GapAblationPoint {
  std::size_t gap_len = 0;
  double accuracy_sml_smooth = 0.0;
  double accuracy_smooth_only = 0.0;
};

struct HmmParams;  // defined in smoothing.hpp

std::vector<GapAblationPoint> gap_ablation(
    const std::vector<GapAblationInput>& sessions,
    const std::vector<std::size_t>& gap_lens, int trials,
    const HmmParams& params, std::uint64_t seed);

}  // namespace hypnos
