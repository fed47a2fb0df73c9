#include "hypnos/referencing.hpp"

#include "hypnos/errors.hpp"

namespace hypnos {

std::string to_string(ReferencingScheme s) {
  switch (s) {
    case ReferencingScheme::Dynamic: return "dynamic";
    case ReferencingScheme::ContralateralBe: return "contralateral";
    case ReferencingScheme::CmsOnly: return "cms";
  }
  return "?";
}

ReferencingScheme scheme_from_string(const std::string& s) {
  if (s == "dynamic") return ReferencingScheme::Dynamic;
  if (s == "contralateral") return ReferencingScheme::ContralateralBe;
  if (s == "cms") return ReferencingScheme::CmsOnly;
  raise(ErrorCode::ConfigError, "unknown referencing scheme '" + s + "'");
}

namespace {

Derivation cms_derivation(const EpochView& epoch, int c) {
  Derivation d;
  d.name = kExgChannelNames[c];
  d.source = static_cast<ExgChannel>(c);
  d.samples.assign(epoch.exg[c].begin(), epoch.exg[c].end());
  return d;
}

Derivation referenced_derivation(const EpochView& epoch, int c, int ref) {
  Derivation d;
  d.name = std::string(kExgChannelNames[c]) + "-" + kExgChannelNames[ref];
  d.source = static_cast<ExgChannel>(c);
  const auto& src = epoch.exg[c];
  const auto& r = epoch.exg[ref];
  d.samples.resize(src.size());
  for (std::size_t i = 0; i < src.size(); ++i) d.samples[i] = src[i] - r[i];
  return d;
}

}  // namespace

std::vector<Derivation> apply_scheme(const EpochView& epoch,
                                     const ChannelMask& mask,
                                     ReferencingScheme scheme) {
  for (int c = 0; c < kNumExgChannels; ++c)
    if (epoch.exg[c].empty())
      raise(ErrorCode::MissingChannel,
            std::string("channel ") + kExgChannelNames[c] + " has no samples");

  const int be_l = static_cast<int>(ExgChannel::BeL);
  const int be_r = static_cast<int>(ExgChannel::BeR);
  std::vector<Derivation> out;

  switch (scheme) {
    case ReferencingScheme::CmsOnly:
      for (int c = 0; c < kNumExgChannels; ++c)
        if (mask[c]) out.push_back(cms_derivation(epoch, c));
      break;

    case ReferencingScheme::ContralateralBe:
      for (int c = 0; c < kNumExgChannels; ++c) {
        if (!mask[c]) continue;
        int ref = static_cast<int>(opposite_be(static_cast<ExgChannel>(c)));
        if (!mask[ref]) continue;  // opposite BE unusable: drop the channel
        out.push_back(referenced_derivation(epoch, c, ref));
      }
      break;

    case ReferencingScheme::Dynamic:
      for (int c = 0; c < kNumExgChannels; ++c) {
        if (!mask[c]) continue;
        bool left = is_left_side(static_cast<ExgChannel>(c));
        int ref = left ? be_r : be_l;
        if (mask[ref])
          out.push_back(referenced_derivation(epoch, c, ref));
        else
          out.push_back(cms_derivation(epoch, c));
      }
      break;
  }
  return out;
}

}  // namespace hypnos
