#include "hypnos/hypnogram.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "hypnos/errors.hpp"

namespace hypnos {

std::size_t Hypnogram::count(SleepStage s) const {
  return static_cast<std::size_t>(
      std::count(stages.begin(), stages.end(), s));
}

Hypnogram consensus_hypnogram(const std::vector<Hypnogram>& raters) {
  if (raters.size() < 3)
    raise(ErrorCode::TooFewRaters, "consensus needs at least 3 hypnograms");
  const std::size_t n = raters[0].size();
  for (const auto& r : raters) {
    if (r.size() != n)
      raise(ErrorCode::LengthMismatch, "rater hypnograms differ in length");
    if (r.has_unscored())
      raise(ErrorCode::FormatError, "consensus input contains Unscored epochs");
  }

  // Mean pairwise per-epoch agreement of each rater, over all epochs.
  const std::size_t k = raters.size();
  std::vector<double> agreement(k, 0.0);
  if (n > 0 && k > 1) {
    for (std::size_t a = 0; a < k; ++a) {
      double total = 0.0;
      for (std::size_t b = 0; b < k; ++b) {
        if (a == b) continue;
        std::size_t same = 0;
        for (std::size_t e = 0; e < n; ++e)
          if (raters[a][e] == raters[b][e]) ++same;
        total += static_cast<double>(same) / static_cast<double>(n);
      }
      agreement[a] = total / static_cast<double>(k - 1);
    }
  }

  // Rater preference order for full ties: agreement desc, then index asc.
  std::vector<std::size_t> tie_order(k);
  for (std::size_t i = 0; i < k; ++i) tie_order[i] = i;
  std::stable_sort(tie_order.begin(), tie_order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return agreement[a] > agreement[b];
                   });

  Hypnogram out;
  out.stages.resize(n);
  for (std::size_t e = 0; e < n; ++e) {
    std::array<int, 4> votes{0, 0, 0, 0};
    for (std::size_t r = 0; r < k; ++r)
      ++votes[static_cast<int>(raters[r][e])];
    int best = 0;
    bool tie = false;
    for (int s = 1; s < 4; ++s) {
      if (votes[s] > votes[best]) {
        best = s;
        tie = false;
      } else if (votes[s] == votes[best]) {
        tie = true;
      }
    }
    if (!tie) {
      out.stages[e] = static_cast<SleepStage>(best);
      continue;
    }
    // Only ties among maximal vote counts matter.
    int max_votes = votes[best];
    int n_max = 0;
    for (int s = 0; s < 4; ++s)
      if (votes[s] == max_votes) ++n_max;
    if (n_max == 1) {
      out.stages[e] = static_cast<SleepStage>(best);
      continue;
    }
    // Defer to the most-agreeing rater whose vote is among the tied stages.
    for (std::size_t r : tie_order) {
      SleepStage v = raters[r][e];
      if (votes[static_cast<int>(v)] == max_votes) {
        out.stages[e] = v;
        break;
      }
    }
  }
  return out;
}

std::optional<std::size_t> sol_from_hypnogram(const Hypnogram& h, int run_len) {
  if (run_len < 1)
    raise(ErrorCode::ConfigError, "run_len must be >= 1");
  std::size_t run = 0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    SleepStage s = h[i];
    if (is_sleep(s)) {
      ++run;
      if (run == static_cast<std::size_t>(run_len))
        return i + 1 - static_cast<std::size_t>(run_len);
    } else {
      run = 0;  // Wake or Unscored breaks the run
    }
  }
  return std::nullopt;
}

std::string hypnogram_to_text(const Hypnogram& h) {
  std::string out;
  out.reserve(h.size() * 2);
  for (SleepStage s : h.stages) {
    out.push_back(stage_token(s));
    out.push_back('\n');
  }
  return out;
}

Hypnogram hypnogram_from_text(const std::string& text) {
  Hypnogram h;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() && in.eof()) break;
    if (line.size() != 1)
      raise(ErrorCode::FormatError,
            "hypnogram line " + std::to_string(line_no) +
                ": expected a single stage token");
    h.stages.push_back(stage_from_token(line[0]));
  }
  return h;
}

void write_hypnogram(const std::filesystem::path& path, const Hypnogram& h) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << hypnogram_to_text(h);
}

Hypnogram read_hypnogram(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return hypnogram_from_text(ss.str());
}

}  // namespace hypnos
