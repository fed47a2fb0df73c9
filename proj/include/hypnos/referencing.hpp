#pragma once

#include <string>
#include <vector>

#include "hypnos/quality.hpp"
#include "hypnos/recording.hpp"

namespace hypnos {

enum class ReferencingScheme { Dynamic, ContralateralBe, CmsOnly };

std::string to_string(ReferencingScheme s);
ReferencingScheme scheme_from_string(const std::string& s);

// One referenced signal ready for staging, e.g. "FH_R-BE_L" or "FH_L" (CMS).
struct Derivation {
  std::string name;
  ExgChannel source;
  std::vector<double> samples;
};

// Produces the referenced channel set for one epoch given the scorable mask.
//   CmsOnly:         scorable channels unchanged.
//   ContralateralBe: each scorable channel minus the opposite-side BE channel;
//                    dropped when that BE is unscorable.
//   Dynamic:         CMS by default; if BE_L is scorable the scorable
//                    right-side channels are re-referenced to BE_L, and
//                    symmetrically for BE_R and the left side.
std::vector<Derivation> apply_scheme(const EpochView& epoch,
                                     const ChannelMask& mask,
                                     ReferencingScheme scheme);

}  // namespace hypnos
