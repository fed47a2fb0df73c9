#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hypnos/stage.hpp"

namespace hypnos {

// Per-epoch stage sequence over a session. Epochs are the fixed 30 s
// scoring grid; epoch i covers [30*i, 30*(i+1)) seconds.
struct Hypnogram {
  static constexpr double kEpochSeconds = 30.0;

  std::vector<SleepStage> stages;

  Hypnogram() = default;
  explicit Hypnogram(std::vector<SleepStage> s) : stages(std::move(s)) {}

  std::size_t size() const { return stages.size(); }
  bool empty() const { return stages.empty(); }
  SleepStage& operator[](std::size_t i) { return stages[i]; }
  SleepStage operator[](std::size_t i) const { return stages[i]; }

  std::size_t count(SleepStage s) const;
  bool has_unscored() const { return count(SleepStage::Unscored) > 0; }
  double duration_min() const { return static_cast<double>(size()) * 0.5; }

  bool operator==(const Hypnogram&) const = default;
};

// Majority vote per epoch over >= 3 equal-length hypnograms with no Unscored
// entries. Full ties go to the rater with the highest mean pairwise per-epoch
// agreement across the whole session; residual ties to the lowest rater index.
Hypnogram consensus_hypnogram(const std::vector<Hypnogram>& raters);

// First epoch starting a run of `run_len` consecutive non-Wake, non-Unscored
// stages; absent if no such run exists. SOL in minutes = index * 0.5.
std::optional<std::size_t> sol_from_hypnogram(const Hypnogram& h, int run_len = 2);

// Text format: one token per line from {W,L,D,R,U}; line i = epoch i.
// Every line is terminated with '\n'; no other whitespace.
std::string hypnogram_to_text(const Hypnogram& h);
Hypnogram hypnogram_from_text(const std::string& text);

void write_hypnogram(const std::filesystem::path& path, const Hypnogram& h);
Hypnogram read_hypnogram(const std::filesystem::path& path);

}  // namespace hypnos
