#include "hypnos/stage.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/errors.hpp"

namespace hypnos {

char stage_token(SleepStage s) {
  switch (s) {
    case SleepStage::Wake: return 'W';
    case SleepStage::Light: return 'L';
    case SleepStage::Deep: return 'D';
    case SleepStage::Rem: return 'R';
    case SleepStage::Unscored: return 'U';
  }
  return '?';
}

SleepStage stage_from_token(char token) {
  switch (token) {
    case 'W': return SleepStage::Wake;
    case 'L': return SleepStage::Light;
    case 'D': return SleepStage::Deep;
    case 'R': return SleepStage::Rem;
    case 'U': return SleepStage::Unscored;
    default:
      raise(ErrorCode::FormatError,
            std::string("unknown stage token '") + token + "'");
  }
}

const char* stage_name(SleepStage s) {
  switch (s) {
    case SleepStage::Wake: return "Wake";
    case SleepStage::Light: return "Light";
    case SleepStage::Deep: return "Deep";
    case SleepStage::Rem: return "REM";
    case SleepStage::Unscored: return "Unscored";
  }
  return "?";
}

void StageDistribution::normalize() {
  double s = sum();
  if (!(s > 0.0)) raise(ErrorCode::ZeroPower, "distribution sums to zero");
  for (double& v : p) v /= s;
}

bool StageDistribution::is_normalized(double tol) const {
  if (std::abs(sum() - 1.0) > tol) return false;
  return std::all_of(p.begin(), p.end(), [](double v) { return v >= 0.0; });
}

SleepStage StageDistribution::argmax() const {
  int best = 0;
  for (int i = 1; i < 4; ++i) {
    if (p[i] > p[best]) best = i;  // strict: ties keep the earlier stage
  }
  return static_cast<SleepStage>(best);
}

StageDistribution softmax4(const std::array<double, 4>& scores) {
  double m = *std::max_element(scores.begin(), scores.end());
  StageDistribution d;
  double total = 0.0;
  for (int i = 0; i < 4; ++i) {
    d.p[i] = std::exp(scores[i] - m);
    total += d.p[i];
  }
  for (double& v : d.p) v /= total;
  return d;
}

}  // namespace hypnos
