#pragma once

#include <array>
#include <string>

namespace hypnos {

// 4-stage scoring with NREM 1/2 merged into Light. Unscored marks epochs the
// real-time pipeline could not score; offline smoothing removes it.
enum class SleepStage : int { Wake = 0, Light = 1, Deep = 2, Rem = 3, Unscored = 4 };

inline constexpr int kNumScoredStages = 4;
inline constexpr int kNumObservedSymbols = 5;  // scored stages + Unscored

char stage_token(SleepStage s);
SleepStage stage_from_token(char token);
const char* stage_name(SleepStage s);

inline bool is_scored(SleepStage s) { return s != SleepStage::Unscored; }
inline bool is_sleep(SleepStage s) {
  return s == SleepStage::Light || s == SleepStage::Deep || s == SleepStage::Rem;
}

// Probability vector over {Wake, Light, Deep, REM}. Producing operations keep
// the components summing to 1 within 1e-9.
struct StageDistribution {
  std::array<double, 4> p{0.25, 0.25, 0.25, 0.25};

  static StageDistribution uniform() { return {}; }

  double& operator[](SleepStage s) { return p[static_cast<int>(s)]; }
  double operator[](SleepStage s) const { return p[static_cast<int>(s)]; }

  double sum() const { return p[0] + p[1] + p[2] + p[3]; }

  // Divides by the sum; requires a strictly positive sum.
  void normalize();

  bool is_normalized(double tol = 1e-9) const;

  // Ties resolved by the fixed order Wake < Light < Deep < REM.
  SleepStage argmax() const;

  double sleep_mass() const { return p[1] + p[2] + p[3]; }
};

StageDistribution softmax4(const std::array<double, 4>& scores);

}  // namespace hypnos
