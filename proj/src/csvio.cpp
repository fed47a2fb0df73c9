#include "hypnos/csvio.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "hypnos/errors.hpp"

namespace hypnos {

namespace {

void write_stream_csv(const std::filesystem::path& path,
                      const std::string& header,
                      const std::vector<const std::vector<double>*>& columns,
                      double fs, const char* value_fmt) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n" << header << "\n";
  const std::size_t n = columns.empty() ? 0 : columns[0]->size();
  char buf[64];
  std::string line;
  for (std::size_t i = 0; i < n; ++i) {
    line.clear();
    std::snprintf(buf, sizeof(buf), "%.4f", static_cast<double>(i) / fs);
    line += buf;
    for (const auto* col : columns) {
      std::snprintf(buf, sizeof(buf), value_fmt, (*col)[i]);
      line += ',';
      line += buf;
    }
    line += '\n';
    out << line;
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> columns;  // column-major
  std::size_t rows = 0;
};

CsvTable read_stream_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!have_header) {
      std::istringstream hs(line);
      std::string cell;
      while (std::getline(hs, cell, ',')) t.header.push_back(cell);
      t.columns.resize(t.header.size());
      have_header = true;
      continue;
    }
    const char* p = line.data();
    const char* end = p + line.size();
    std::size_t col = 0;
    while (col < t.columns.size()) {
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc()) {
        std::size_t col_1 = col + 1;
        raise(ErrorCode::FormatError,
              path.filename().string() + ": line " + std::to_string(line_no) +
                  ", column " + std::to_string(col_1) + ": bad number");
      }
      t.columns[col].push_back(v);
      ++col;
      p = next;
      if (p < end && *p == ',') ++p;
      else if (col < t.columns.size())
        raise(ErrorCode::FormatError,
              path.filename().string() + ": line " + std::to_string(line_no) +
                  ": too few columns");
    }
    if (p != end)
      raise(ErrorCode::FormatError,
            path.filename().string() + ": line " + std::to_string(line_no) +
                ": too many columns");
    ++t.rows;
  }
  if (!have_header)
    raise(ErrorCode::FormatError, path.filename().string() + ": missing header");
  return t;
}

double infer_rate(const std::vector<double>& t, const std::string& file) {
  if (t.size() < 2)
    raise(ErrorCode::FormatError, file + ": need >= 2 samples");
  double span = t.back() - t.front();
  if (!(span > 0.0))
    raise(ErrorCode::FormatError, file + ": timestamps not increasing");
  return static_cast<double>(t.size() - 1) / span;
}

void check_rate(double inferred, double expected, const std::string& file) {
  if (std::abs(inferred - expected) > 0.01 * expected)
    raise(ErrorCode::RateMismatch,
          file + ": timestamps imply " + std::to_string(inferred) +
              " Hz, expected " + std::to_string(expected));
}

}  // namespace

void write_recording(const std::filesystem::path& dir,
                     const SessionRecording& rec) {
  std::filesystem::create_directories(dir);
  {
    std::vector<const std::vector<double>*> cols;
    for (int c = 0; c < kNumExgChannels; ++c) cols.push_back(&rec.exg[c]);
    write_stream_csv(dir / "exg.csv", "t,FH_L,FH_R,OTE_L,OTE_R,BE_L,BE_R",
                     cols, rec.fs_exg, "%.3f");
  }
  {
    std::vector<const std::vector<double>*> cols;
    for (int c = 0; c < kNumPpgChannels; ++c) cols.push_back(&rec.ppg[c]);
    write_stream_csv(dir / "ppg.csv", "t,ir,red,green", cols, rec.fs_ppg,
                     "%.3f");
  }
  {
    std::vector<const std::vector<double>*> cols;
    for (int c = 0; c < kNumImuAxes; ++c) cols.push_back(&rec.imu[c]);
    write_stream_csv(dir / "imu.csv", "t,ax,ay,az", cols, rec.fs_imu, "%.5f");
  }
}

SessionRecording load_recording(const std::filesystem::path& dir,
                                double expect_fs_exg, double expect_fs_ppg,
                                double expect_fs_imu) {
  SessionRecording rec;

  CsvTable exg = read_stream_csv(dir / "exg.csv");
  const std::vector<std::string> want_exg = {"t",     "FH_L",  "FH_R", "OTE_L",
                                             "OTE_R", "BE_L",  "BE_R"};
  if (exg.header.size() != want_exg.size())
    raise(ErrorCode::ChannelMissing, "exg.csv: expected 7 columns");
  for (std::size_t i = 0; i < want_exg.size(); ++i)
    if (exg.header[i] != want_exg[i])
      raise(ErrorCode::ChannelMissing,
            "exg.csv: missing column " + want_exg[i]);
  check_rate(infer_rate(exg.columns[0], "exg.csv"), expect_fs_exg, "exg.csv");
  rec.fs_exg = expect_fs_exg;
  for (int c = 0; c < kNumExgChannels; ++c)
    rec.exg[c] = std::move(exg.columns[static_cast<std::size_t>(c) + 1]);

  CsvTable ppg = read_stream_csv(dir / "ppg.csv");
  const std::vector<std::string> want_ppg = {"t", "ir", "red", "green"};
  if (ppg.header != want_ppg)
    raise(ErrorCode::ChannelMissing, "ppg.csv: header must be t,ir,red,green");
  check_rate(infer_rate(ppg.columns[0], "ppg.csv"), expect_fs_ppg, "ppg.csv");
  rec.fs_ppg = expect_fs_ppg;
  for (int c = 0; c < kNumPpgChannels; ++c)
    rec.ppg[c] = std::move(ppg.columns[static_cast<std::size_t>(c) + 1]);

  CsvTable imu = read_stream_csv(dir / "imu.csv");
  const std::vector<std::string> want_imu = {"t", "ax", "ay", "az"};
  if (imu.header != want_imu)
    raise(ErrorCode::ChannelMissing, "imu.csv: header must be t,ax,ay,az");
  check_rate(infer_rate(imu.columns[0], "imu.csv"), expect_fs_imu, "imu.csv");
  rec.fs_imu = expect_fs_imu;
  for (int c = 0; c < kNumImuAxes; ++c)
    rec.imu[c] = std::move(imu.columns[static_cast<std::size_t>(c) + 1]);

  return rec;
}

void write_vitals_csv(const std::filesystem::path& path,
                      const std::vector<VitalsRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n";
  out << "t_start,hr_bpm,hr_quality,rr_brpm,posture\n";
  char buf[64];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.1f", r.t_start);
    out << buf << ",";
    if (r.hr_bpm) {
      std::snprintf(buf, sizeof(buf), "%.2f", *r.hr_bpm);
      out << buf;
    }
    out << "," << (r.hr_quality ? 1 : 0) << ",";
    if (r.rr_brpm) {
      std::snprintf(buf, sizeof(buf), "%.2f", *r.rr_brpm);
      out << buf;
    }
    out << ",";
    if (r.posture) out << posture_name(*r.posture);
    out << "\n";
  }
}

void write_actions_csv(const std::filesystem::path& path,
                       const std::vector<ControllerAction>& actions) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n";
  out << "t,action,layer,volume,content_id\n";
  char buf[64];
  for (const auto& a : actions) {
    std::snprintf(buf, sizeof(buf), "%.3f", a.t);
    out << buf << "," << a.action << "," << a.layer << ",";
    std::snprintf(buf, sizeof(buf), "%.4f", a.volume);
    out << buf << "," << a.content_id << "\n";
  }
}

void write_poas_csv(const std::filesystem::path& path,
                    const std::vector<std::pair<double, double>>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n";
  out << "t,poas\n";
  char buf[64];
  for (const auto& [t, v] : trace) {
    std::snprintf(buf, sizeof(buf), "%.1f,%.4f", t, v);
    out << buf << "\n";
  }
}

void write_provenance_csv(const std::filesystem::path& path,
                          const std::vector<EpochDecision>& decisions,
                          FilterMode filter_mode) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n";
  out << "# filter_mode "
      << (filter_mode == FilterMode::ZeroPhase ? "zero-phase" : "causal")
      << "\n";
  out << "epoch,stage,source\n";
  for (const auto& d : decisions)
    out << d.epoch << "," << stage_token(d.stage) << "," << source_name(d.source)
        << "\n";
}


void write_spectrogram_csv(const std::filesystem::path& path,
                           const EpochSpectrogram& sg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << "# schema " << kSchemaVersion << "\n";
  char buf[64];
  out << "t_start";
  for (std::size_t f = 0; f < sg.n_freq; ++f) {
    std::snprintf(buf, sizeof(buf), "%.1f", sg.freq(f));
    out << "," << buf;
  }
  out << "\n";
  const double hop = sg.window_s * 0.5;
  for (std::size_t t = 0; t < sg.n_time; ++t) {
    std::snprintf(buf, sizeof(buf), "%.1f", hop * static_cast<double>(t));
    out << buf;
    for (std::size_t f = 0; f < sg.n_freq; ++f) {
      std::snprintf(buf, sizeof(buf), "%.6g", sg.at(t, f));
      out << "," << buf;
    }
    out << "\n";
  }
}

EpochSpectrogram read_spectrogram_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  EpochSpectrogram sg;
  std::string line;
  std::vector<double> freqs;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream row(line);
    std::string cell;
    if (!have_header) {
      std::getline(row, cell, ',');  // t_start
      while (std::getline(row, cell, ',')) freqs.push_back(std::stod(cell));
      if (freqs.size() < 2)
        raise(ErrorCode::FormatError, "spectrogram header too short");
      sg.n_freq = freqs.size();
      sg.f0 = freqs.front();
      sg.df = freqs[1] - freqs[0];
      have_header = true;
      continue;
    }
    std::getline(row, cell, ',');  // t_start
    std::size_t f = 0;
    while (std::getline(row, cell, ',')) {
      sg.power.push_back(std::stod(cell));
      ++f;
    }
    if (f != sg.n_freq)
      raise(ErrorCode::FormatError, "spectrogram row width mismatch");
    ++sg.n_time;
  }
  return sg;
}

}  // namespace hypnos
