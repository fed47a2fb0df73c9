#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace hypnos {

// The six headband source channels, CMS-referenced on ingest.
enum class ExgChannel : int { FhL = 0, FhR = 1, OteL = 2, OteR = 3, BeL = 4, BeR = 5 };

inline constexpr int kNumExgChannels = 6;
inline constexpr int kNumPpgChannels = 3;  // IR, Red, Green
inline constexpr int kNumImuAxes = 3;      // ax, ay, az

extern const std::array<const char*, 6> kExgChannelNames;

ExgChannel exg_channel_from_name(const std::string& name);
bool is_left_side(ExgChannel c);
ExgChannel opposite_be(ExgChannel c);  // BE_R for left-side channels, BE_L otherwise

// Synchronized multi-stream recording of one session. All streams share a
// common time origin; exg in uV, imu in g, ppg in arbitrary units.
struct SessionRecording {
  double fs_exg = 250.0;
  double fs_ppg = 50.0;
  double fs_imu = 50.0;
  double start_time = 0.0;

  std::array<std::vector<double>, kNumExgChannels> exg;
  std::array<std::vector<double>, kNumPpgChannels> ppg;
  std::array<std::vector<double>, kNumImuAxes> imu;

  double duration_s() const;
};

// Zero-copy window of one 30 s epoch across all streams.
struct EpochView {
  std::size_t index = 0;
  double fs_exg = 0.0;
  double fs_ppg = 0.0;
  double fs_imu = 0.0;
  std::array<std::span<const double>, kNumExgChannels> exg;
  std::array<std::span<const double>, kNumPpgChannels> ppg;
  std::array<std::span<const double>, kNumImuAxes> imu;

  double start_s() const { return static_cast<double>(index) * 30.0; }
};

// Splits the recording into contiguous 30 s epochs; a trailing partial epoch
// is discarded. Throws EmptyRecording if any stream is empty.
std::vector<EpochView> slice_epochs(const SessionRecording& rec);

}  // namespace hypnos
