#include "hypnos/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hypnos/errors.hpp"

namespace hypnos {

namespace {

constexpr const char* kStageCols = "WLDR";
constexpr const char* kObsCols = "WLDRU";

void check_row(const double* row, std::size_t n, const char* what) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(row[i] > 0.0))
      raise(ErrorCode::ConfigError,
            std::string(what) + " row has a non-positive entry");
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > 1e-9)
    raise(ErrorCode::ConfigError, std::string(what) + " row does not sum to 1");
}

}  // namespace

void HmmParams::validate() const {
  for (const auto& row : transition) check_row(row.data(), 4, "transition");
  for (const auto& row : emission) check_row(row.data(), 5, "emission");
  check_row(initial.data(), 4, "initial");
}

std::string HmmParams::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "transition " << "W L D R" << "\n";
  for (int s = 0; s < 4; ++s) {
    out << kStageCols[s];
    for (int t = 0; t < 4; ++t) out << " " << transition[s][t];
    out << "\n";
  }
  out << "emission " << "W L D R U" << "\n";
  for (int s = 0; s < 4; ++s) {
    out << kStageCols[s];
    for (int o = 0; o < 5; ++o) out << " " << emission[s][o];
    out << "\n";
  }
  out << "initial W L D R\n";
  for (int s = 0; s < 4; ++s) out << (s ? " " : "") << initial[s];
  out << "\n";
  return out.str();
}

HmmParams HmmParams::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string word;
  HmmParams p;
  auto expect = [&](const std::string& want) {
    if (!(in >> word) || word != want)
      raise(ErrorCode::FormatError,
            "hmm params: expected '" + want + "', got '" + word + "'");
  };
  expect("transition");
  for (const char* c = "WLDR"; *c; ++c) expect(std::string(1, *c));
  for (int s = 0; s < 4; ++s) {
    expect(std::string(1, kStageCols[s]));
    for (int t = 0; t < 4; ++t)
      if (!(in >> p.transition[s][t]))
        raise(ErrorCode::FormatError, "hmm params: bad transition value");
  }
  expect("emission");
  for (const char* c = "WLDRU"; *c; ++c) expect(std::string(1, *c));
  for (int s = 0; s < 4; ++s) {
    expect(std::string(1, kStageCols[s]));
    for (int o = 0; o < 5; ++o)
      if (!(in >> p.emission[s][o]))
        raise(ErrorCode::FormatError, "hmm params: bad emission value");
  }
  expect("initial");
  for (const char* c = "WLDR"; *c; ++c) expect(std::string(1, *c));
  for (int s = 0; s < 4; ++s)
    if (!(in >> p.initial[s]))
      raise(ErrorCode::FormatError, "hmm params: bad initial value");
  p.validate();
  return p;
}

void write_hmm_params(const std::filesystem::path& path, const HmmParams& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << p.to_text();
}

HmmParams read_hmm_params(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return HmmParams::from_text(ss.str());
}

HmmParams estimate_hmm(
    const std::vector<std::pair<Hypnogram, Hypnogram>>& corpus) {
  if (corpus.empty()) raise(ErrorCode::EmptyCorpus, "no sessions");

  std::array<std::array<double, 4>, 4> trans_counts{};
  std::array<std::array<double, 5>, 4> emit_counts{};
  std::array<double, 4> init_counts{};

  for (const auto& [truth, observed] : corpus) {
    if (truth.size() != observed.size())
      raise(ErrorCode::LengthMismatch, "truth/observed length differ");
    if (truth.has_unscored())
      raise(ErrorCode::FormatError, "truth hypnogram contains Unscored");
    if (truth.empty()) continue;
    ++init_counts[static_cast<int>(truth[0])];
    for (std::size_t e = 0; e < truth.size(); ++e) {
      int s = static_cast<int>(truth[e]);
      ++emit_counts[s][static_cast<int>(observed[e])];
      if (e + 1 < truth.size())
        ++trans_counts[s][static_cast<int>(truth[e + 1])];
    }
  }

  HmmParams p;
  for (int s = 0; s < 4; ++s) {
    double tn = 0.0, en = 0.0;
    for (int t = 0; t < 4; ++t) tn += trans_counts[s][t];
    for (int o = 0; o < 5; ++o) en += emit_counts[s][o];
    for (int t = 0; t < 4; ++t)
      p.transition[s][t] = (trans_counts[s][t] + 1.0) / (tn + 4.0);
    for (int o = 0; o < 5; ++o)
      p.emission[s][o] = (emit_counts[s][o] + 1.0) / (en + 5.0);
  }
  double in = init_counts[0] + init_counts[1] + init_counts[2] + init_counts[3];
  for (int s = 0; s < 4; ++s) p.initial[s] = (init_counts[s] + 1.0) / (in + 4.0);
  p.validate();
  return p;
}

Hypnogram rule_fill(const Hypnogram& h) {
  if (h.empty()) raise(ErrorCode::AllUnscored, "empty hypnogram");
  if (h.count(SleepStage::Unscored) == h.size())
    raise(ErrorCode::AllUnscored, "no scored epoch to fill from");

  Hypnogram out = h;
  const std::size_t n = out.size();
  std::size_t i = 0;
  while (i < n) {
    if (out[i] != SleepStage::Unscored) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < n && out[j] == SleepStage::Unscored) ++j;
    // run is [i, j)
    const bool has_left = i > 0;
    const bool has_right = j < n;
    if (!has_left) {
      for (std::size_t k = i; k < j; ++k) out[k] = out[j];
    } else if (!has_right) {
      for (std::size_t k = i; k < j; ++k) out[k] = out[i - 1];
    } else {
      SleepStage left = out[i - 1];
      SleepStage right = out[j];
      if (left == right) {
        for (std::size_t k = i; k < j; ++k) out[k] = left;
      } else {
        std::size_t len = j - i;
        std::size_t left_len = (len + 1) / 2;  // odd middle epoch goes left
        for (std::size_t k = i; k < j; ++k)
          out[k] = (k - i < left_len) ? left : right;
        // A Wake-to-Deep fill must pass through Light.
        if (left == SleepStage::Wake && right == SleepStage::Deep) {
          std::size_t step = i + left_len;
          if (step >= j) step = j - 1;  // single-epoch run becomes the step
          out[step] = SleepStage::Light;
        }
      }
    }
    i = j;
  }
  return out;
}

Hypnogram viterbi(const Hypnogram& observed, const HmmParams& params) {
  params.validate();
  const std::size_t n = observed.size();
  if (n == 0) return observed;

  std::array<std::array<double, 4>, 4> log_a;
  std::array<std::array<double, 5>, 4> log_b;
  std::array<double, 4> log_pi;
  for (int s = 0; s < 4; ++s) {
    log_pi[s] = std::log(params.initial[s]);
    for (int t = 0; t < 4; ++t) log_a[s][t] = std::log(params.transition[s][t]);
    for (int o = 0; o < 5; ++o) log_b[s][o] = std::log(params.emission[s][o]);
  }

  std::vector<std::array<double, 4>> score(n);
  std::vector<std::array<int, 4>> back(n);
  const int o0 = static_cast<int>(observed[0]);
  for (int s = 0; s < 4; ++s) {
    score[0][s] = log_pi[s] + log_b[s][o0];
    back[0][s] = -1;
  }
  for (std::size_t e = 1; e < n; ++e) {
    const int o = static_cast<int>(observed[e]);
    for (int s = 0; s < 4; ++s) {
      int best_prev = 0;
      double best = score[e - 1][0] + log_a[0][s];
      for (int r = 1; r < 4; ++r) {
        double v = score[e - 1][r] + log_a[r][s];
        if (v > best) {  // strict: ties keep the lower stage index
          best = v;
          best_prev = r;
        }
      }
      score[e][s] = best + log_b[s][o];
      back[e][s] = best_prev;
    }
  }

  int last = 0;
  for (int s = 1; s < 4; ++s)
    if (score[n - 1][s] > score[n - 1][last]) last = s;

  Hypnogram path;
  path.stages.resize(n);
  for (std::size_t e = n; e-- > 0;) {
    path.stages[e] = static_cast<SleepStage>(last);
    if (e > 0) last = back[e][last];
  }
  return path;
}

Hypnogram smooth(const Hypnogram& h, const HmmParams& params) {
  Hypnogram current = rule_fill(h);
  std::vector<Hypnogram> seen;
  seen.push_back(current);
  for (int iter = 0; iter < 32; ++iter) {
    Hypnogram next = viterbi(current, params);
    if (next == current) return current;
    auto hit = std::find(seen.begin(), seen.end(), next);
    if (hit != seen.end()) {
      // Limit cycle: return its lexicographically smallest member so repeated
      // smoothing is stable.
      Hypnogram best = next;
      for (auto it = hit; it != seen.end(); ++it)
        if (it->stages < best.stages) best = *it;
      return best;
    }
    seen.push_back(next);
    current = next;
  }
  return current;
}

}  // namespace hypnos
