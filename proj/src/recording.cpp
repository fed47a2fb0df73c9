#include "hypnos/recording.hpp"

#include <algorithm>
#include <cmath>

#include "hypnos/errors.hpp"

namespace hypnos {

const std::array<const char*, 6> kExgChannelNames = {"FH_L", "FH_R", "OTE_L",
                                                     "OTE_R", "BE_L", "BE_R"};

ExgChannel exg_channel_from_name(const std::string& name) {
  for (int i = 0; i < kNumExgChannels; ++i)
    if (name == kExgChannelNames[i]) return static_cast<ExgChannel>(i);
  raise(ErrorCode::ChannelMissing, "unknown ExG channel '" + name + "'");
}

bool is_left_side(ExgChannel c) {
  return c == ExgChannel::FhL || c == ExgChannel::OteL || c == ExgChannel::BeL;
}

ExgChannel opposite_be(ExgChannel c) {
  return is_left_side(c) ? ExgChannel::BeR : ExgChannel::BeL;
}

double SessionRecording::duration_s() const {
  double d = 1e30;
  for (const auto& ch : exg)
    d = std::min(d, static_cast<double>(ch.size()) / fs_exg);
  for (const auto& ch : ppg)
    d = std::min(d, static_cast<double>(ch.size()) / fs_ppg);
  for (const auto& ch : imu)
    d = std::min(d, static_cast<double>(ch.size()) / fs_imu);
  return d >= 1e30 ? 0.0 : d;
}

std::vector<EpochView> slice_epochs(const SessionRecording& rec) {
  if (!(rec.fs_exg > 0.0) || !(rec.fs_ppg > 0.0) || !(rec.fs_imu > 0.0))
    raise(ErrorCode::ConfigError, "sampling rates must be positive");
  for (const auto& ch : rec.exg)
    if (ch.empty()) raise(ErrorCode::EmptyRecording, "empty ExG channel");
  for (const auto& ch : rec.ppg)
    if (ch.empty()) raise(ErrorCode::EmptyRecording, "empty PPG channel");
  for (const auto& ch : rec.imu)
    if (ch.empty()) raise(ErrorCode::EmptyRecording, "empty IMU axis");

  const std::size_t n_epochs =
      static_cast<std::size_t>(std::floor(rec.duration_s() / 30.0));
  const auto n_exg = static_cast<std::size_t>(std::lround(30.0 * rec.fs_exg));
  const auto n_ppg = static_cast<std::size_t>(std::lround(30.0 * rec.fs_ppg));
  const auto n_imu = static_cast<std::size_t>(std::lround(30.0 * rec.fs_imu));

  std::vector<EpochView> views;
  views.reserve(n_epochs);
  for (std::size_t e = 0; e < n_epochs; ++e) {
    EpochView v;
    v.index = e;
    v.fs_exg = rec.fs_exg;
    v.fs_ppg = rec.fs_ppg;
    v.fs_imu = rec.fs_imu;
    for (int c = 0; c < kNumExgChannels; ++c)
      v.exg[c] = std::span<const double>(rec.exg[c]).subspan(e * n_exg, n_exg);
    for (int c = 0; c < kNumPpgChannels; ++c)
      v.ppg[c] = std::span<const double>(rec.ppg[c]).subspan(e * n_ppg, n_ppg);
    for (int c = 0; c < kNumImuAxes; ++c)
      v.imu[c] = std::span<const double>(rec.imu[c]).subspan(e * n_imu, n_imu);
    views.push_back(v);
  }
  return views;
}

}  // namespace hypnos
