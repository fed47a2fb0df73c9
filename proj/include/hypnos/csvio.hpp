#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "hypnos/control.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/recording.hpp"

namespace hypnos {

inline constexpr int kSchemaVersion = 1;

// CSV layout (exact headers):
//   exg.csv  t,FH_L,FH_R,OTE_L,OTE_R,BE_L,BE_R   (uV)
//   ppg.csv  t,ir,red,green
//   imu.csv  t,ax,ay,az                          (g)
// Every file starts with a "# schema 1" comment line; readers skip comments.
void write_recording(const std::filesystem::path& dir,
                     const SessionRecording& rec);

// Loads the three CSVs from `dir`, checks channel headers, infers sampling
// rates from the timestamps and verifies them against the expected rates
// within 1%. Throws ChannelMissing / FormatError / RateMismatch.
SessionRecording load_recording(const std::filesystem::path& dir,
                                double expect_fs_exg, double expect_fs_ppg,
                                double expect_fs_imu);

struct VitalsRow {
  double t_start = 0.0;
  std::optional<double> hr_bpm;
  bool hr_quality = false;
  std::optional<double> rr_brpm;
  std::optional<Posture> posture;
};

// vitals.csv: t_start,hr_bpm,hr_quality,rr_brpm,posture
void write_vitals_csv(const std::filesystem::path& path,
                      const std::vector<VitalsRow>& rows);

// actions.csv: t,action,layer,volume,content_id
void write_actions_csv(const std::filesystem::path& path,
                       const std::vector<ControllerAction>& actions);

// poas.csv: t,poas
void write_poas_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<double, double>>& trace);

// pred.hyp.prov.csv: epoch,stage,source (plus a filter-mode comment)
void write_provenance_csv(const std::filesystem::path& path,
                          const std::vector<EpochDecision>& decisions,
                          FilterMode filter_mode = FilterMode::ZeroPhase);

// Spectrogram grid dump: header row of bin frequencies, one row per time bin.
void write_spectrogram_csv(const std::filesystem::path& path,
                           const EpochSpectrogram& sg);
EpochSpectrogram read_spectrogram_csv(const std::filesystem::path& path);

}  // namespace hypnos
