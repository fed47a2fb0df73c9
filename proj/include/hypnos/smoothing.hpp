#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "hypnos/hypnogram.hpp"

namespace hypnos {

// HMM over the four scored stages; observations add a fifth Unscored symbol.
// All rows are stochastic and strictly positive (Laplace smoothing).
struct HmmParams {
  std::array<std::array<double, 4>, 4> transition{};  // true -> true
  std::array<std::array<double, 5>, 4> emission{};    // true -> observed
  std::array<double, 4> initial{0.25, 0.25, 0.25, 0.25};

  void validate() const;

  std::string to_text() const;
  static HmmParams from_text(const std::string& text);
};

void write_hmm_params(const std::filesystem::path& path, const HmmParams& p);
HmmParams read_hmm_params(const std::filesystem::path& path);

// Maximum-likelihood counts with add-one smoothing. Transitions come from
// consecutive truth pairs, emissions from (truth, observed) epoch pairs, and
// the initial distribution from the stage frequency at epoch 0.
HmmParams estimate_hmm(
    const std::vector<std::pair<Hypnogram, Hypnogram>>& corpus);

// Fills every Unscored run: same stage on both sides copies it; different
// stages split the run half/half (odd middle epoch goes left); session-edge
// runs take the nearest scored stage; wake-to-deep fills get a Light step.
Hypnogram rule_fill(const Hypnogram& h);

// Log-space MAP stage path for the observed sequence; Unscored observations
// use the fifth emission column; ties break toward the lower stage index.
Hypnogram viterbi(const Hypnogram& observed, const HmmParams& params);

// Two-pass completion: rule_fill, then Viterbi re-decoding repeated until the
// decoded sequence stops changing (the canonical cycle member is returned if
// the decoding ever revisits a previous iterate), which makes the operation
// idempotent. Output contains no Unscored epochs.
Hypnogram smooth(const Hypnogram& h, const HmmParams& params);

}  // namespace hypnos
