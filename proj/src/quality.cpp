#include "hypnos/quality.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hypnos/errors.hpp"
#include "hypnos/filters.hpp"
#include "hypnos/spectral.hpp"

namespace hypnos {

const std::array<const char*, kNumQualityFeatures> kQualityFeatureNames = {
    "flatline_fraction", "clip_fraction", "line_noise_ratio",
    "rms_uv",            "hf_rms_uv",     "kurtosis"};

int quality_feature_index(const std::string& name) {
  for (int i = 0; i < kNumQualityFeatures; ++i)
    if (name == kQualityFeatureNames[i]) return i;
  raise(ErrorCode::MalformedTree, "unknown quality feature '" + name + "'");
}

double QualityFeatures::by_index(int i) const {
  switch (i) {
    case 0: return flatline_fraction;
    case 1: return clip_fraction;
    case 2: return line_noise_ratio;
    case 3: return rms_uv;
    case 4: return hf_rms_uv;
    case 5: return kurtosis;
    default:
      raise(ErrorCode::MalformedTree, "feature index out of range");
  }
}

QualityFeatures exg_quality_features(std::span<const double> epoch_uv,
                                     double fs) {
  const std::size_t n = epoch_uv.size();
  if (static_cast<double>(n) < fs)
    raise(ErrorCode::TooShort, "quality features need >= 1 s of samples");

  QualityFeatures f;

  // Flatline: sum of lengths of identical-value runs of >= fs/10 samples.
  const std::size_t min_run =
      std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(fs / 10.0)));
  std::size_t flat = 0, run = 1;
  std::size_t clipped = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(epoch_uv[i]) >= 490.0) ++clipped;
    if (i > 0) {
      if (epoch_uv[i] == epoch_uv[i - 1]) {
        ++run;
      } else {
        if (run >= min_run) flat += run;
        run = 1;
      }
    }
  }
  if (run >= min_run) flat += run;
  f.flatline_fraction = static_cast<double>(flat) / static_cast<double>(n);
  f.clip_fraction = static_cast<double>(clipped) / static_cast<double>(n);

  double mean = 0.0;
  for (double v : epoch_uv) mean += v;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double v : epoch_uv) {
    double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  f.rms_uv = std::sqrt(m2);
  f.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) - 3.0 : 0.0;

  if (f.rms_uv > 0.0) {
    // Total power equals the AC variance (Parseval); only the two narrow
    // mains bands need spectral bins.
    double total = m2;
    double fmax_line = std::min(61.5, fs * 0.49);
    WelchSpectrum sp = welch_spectrum(epoch_uv, fs, 2.0, fmax_line, 0.0, 48.5);
    double line = sp.band_power(49.0, 51.0 + sp.df) +
                  sp.band_power(59.0, 61.0 + sp.df);
    f.line_noise_ratio = std::min(1.0, line / total);
    if (fs > 90.0) {
      auto hf = filtfilt({design_highpass(40.0, fs)}, epoch_uv, fs);
      double acc = 0.0;
      for (double v : hf) acc += v * v;
      f.hf_rms_uv = std::sqrt(acc / static_cast<double>(n));
    }
  }
  return f;
}

QualityTree QualityTree::default_tree() {
  // Hand-built thresholds: reject flat, clipped, mains-dominated, dead,
  // grossly out-of-range, EMG-storm or spike-dominated channels.
  QualityTree t;
  auto leaf = [&](int verdict) {
    Node n;
    n.verdict = verdict;
    t.nodes.push_back(n);
    return static_cast<int>(t.nodes.size() - 1);
  };
  auto split = [&](const char* feature, double threshold, int left, int right) {
    Node n;
    n.feature = quality_feature_index(feature);
    n.threshold = threshold;
    n.left = left;
    n.right = right;
    t.nodes.push_back(n);
    return static_cast<int>(t.nodes.size() - 1);
  };

  int bad = leaf(0);
  int good = leaf(1);
  int kurt = split("kurtosis", 12.0, good, bad);
  int hf = split("hf_rms_uv", 40.0, kurt, bad);
  int rms_hi = split("rms_uv", 150.0, hf, bad);
  int rms_lo = split("rms_uv", 2.0, bad, rms_hi);
  int line = split("line_noise_ratio", 0.3, rms_lo, bad);
  int clip = split("clip_fraction", 0.05, line, bad);
  int flat = split("flatline_fraction", 0.2, clip, bad);

  // Root must be node 0; rebuild with the root first.
  QualityTree ordered;
  std::vector<int> remap(t.nodes.size(), -1);
  // Depth-first from the root, assigning new indices in visit order.
  std::vector<int> stack{flat};
  while (!stack.empty()) {
    int old = stack.back();
    stack.pop_back();
    if (remap[old] >= 0) continue;
    remap[old] = static_cast<int>(ordered.nodes.size());
    ordered.nodes.push_back(t.nodes[old]);
    if (t.nodes[old].feature >= 0) {
      stack.push_back(t.nodes[old].right);
      stack.push_back(t.nodes[old].left);
    }
  }
  for (auto& n : ordered.nodes) {
    if (n.feature >= 0) {
      n.left = remap[n.left];
      n.right = remap[n.right];
    }
  }
  ordered.validate();
  return ordered;
}

void QualityTree::validate() const {
  if (nodes.empty()) raise(ErrorCode::MalformedTree, "empty tree");
  // Every path must reach a leaf within depth 16 and stay in bounds.
  struct Item {
    int node;
    int depth;
  };
  std::vector<Item> stack{{0, 0}};
  while (!stack.empty()) {
    auto [idx, depth] = stack.back();
    stack.pop_back();
    if (idx < 0 || idx >= static_cast<int>(nodes.size()))
      raise(ErrorCode::MalformedTree, "child index out of range");
    if (depth > 16) raise(ErrorCode::MalformedTree, "tree deeper than 16");
    const Node& n = nodes[static_cast<std::size_t>(idx)];
    if (n.feature < 0) {
      if (n.verdict != 0 && n.verdict != 1)
        raise(ErrorCode::MalformedTree, "leaf verdict must be 0 or 1");
      continue;
    }
    if (n.feature >= kNumQualityFeatures)
      raise(ErrorCode::MalformedTree, "feature index out of range");
    stack.push_back({n.left, depth + 1});
    stack.push_back({n.right, depth + 1});
  }
}

namespace {

nlohmann::json node_to_json(const QualityTree& t, int idx) {
  const auto& n = t.nodes[static_cast<std::size_t>(idx)];
  nlohmann::json j;
  if (n.feature < 0) {
    j["verdict"] = n.verdict == 1 ? "scorable" : "unscorable";
  } else {
    j["feature"] = kQualityFeatureNames[n.feature];
    j["threshold"] = n.threshold;
    j["le"] = node_to_json(t, n.left);
    j["gt"] = node_to_json(t, n.right);
  }
  return j;
}

int node_from_json(const nlohmann::json& j, QualityTree& t) {
  QualityTree::Node n;
  int idx = static_cast<int>(t.nodes.size());
  t.nodes.push_back(n);
  if (j.contains("verdict")) {
    std::string v = j.at("verdict").get<std::string>();
    if (v != "scorable" && v != "unscorable")
      raise(ErrorCode::MalformedTree, "verdict must be scorable|unscorable");
    t.nodes[static_cast<std::size_t>(idx)].verdict = v == "scorable" ? 1 : 0;
    return idx;
  }
  if (!j.contains("feature") || !j.contains("threshold") ||
      !j.contains("le") || !j.contains("gt"))
    raise(ErrorCode::MalformedTree, "node needs feature/threshold/le/gt");
  t.nodes[static_cast<std::size_t>(idx)].feature =
      quality_feature_index(j.at("feature").get<std::string>());
  t.nodes[static_cast<std::size_t>(idx)].threshold =
      j.at("threshold").get<double>();
  int left = node_from_json(j.at("le"), t);
  int right = node_from_json(j.at("gt"), t);
  t.nodes[static_cast<std::size_t>(idx)].left = left;
  t.nodes[static_cast<std::size_t>(idx)].right = right;
  return idx;
}

}  // namespace

std::string QualityTree::to_json() const {
  validate();
  return node_to_json(*this, 0).dump(2) + "\n";
}

QualityTree QualityTree::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorCode::MalformedTree, std::string("bad tree JSON: ") + e.what());
  }
  QualityTree t;
  node_from_json(j, t);
  t.validate();
  return t;
}

void write_quality_tree(const std::filesystem::path& path, const QualityTree& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << t.to_json();
}

QualityTree read_quality_tree(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return QualityTree::from_json(ss.str());
}

bool classify_channel(const QualityFeatures& f, const QualityTree& tree) {
  tree.validate();
  int idx = 0;
  for (int depth = 0; depth <= 16; ++depth) {
    const auto& n = tree.nodes[static_cast<std::size_t>(idx)];
    if (n.feature < 0) return n.verdict == 1;
    idx = f.by_index(n.feature) <= n.threshold ? n.left : n.right;
  }
  raise(ErrorCode::MalformedTree, "no leaf reached within depth 16");
}

ChannelMask select_channels(const EpochView& epoch, const QualityTree& tree) {
  ChannelMask mask{};
  for (int c = 0; c < kNumExgChannels; ++c) {
    QualityFeatures f = exg_quality_features(epoch.exg[c], epoch.fs_exg);
    mask[c] = classify_channel(f, tree);
  }
  return mask;
}

bool ppg_quality(std::span<const double> window, double fs,
                 const PpgQualityConfig& cfg) {
  if (static_cast<double>(window.size()) < 5.0 * fs - 0.5)
    raise(ErrorCode::TooShort, "ppg quality needs a 5 s window");

  double lo = window[0], hi = window[0];
  for (double v : window) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    if (std::abs(v) >= cfg.saturation_level) return false;
  }
  const double ac = hi - lo;
  if (ac < cfg.min_ac_amplitude || ac > cfg.max_ac_amplitude) return false;

  // Periodicity: a normalized autocorrelation peak inside the pulse band.
  const auto lag_lo =
      static_cast<std::size_t>(std::floor(fs / cfg.pulse_band_hi_hz));
  const auto lag_hi =
      static_cast<std::size_t>(std::ceil(fs / cfg.pulse_band_lo_hz));
  auto r = autocorrelation(window, lag_hi);
  if (r[0] == 0.0) return false;  // zero variance
  double peak = -1.0;
  for (std::size_t lag = lag_lo; lag <= lag_hi && lag < r.size(); ++lag)
    peak = std::max(peak, r[lag]);
  return peak > cfg.min_autocorr_peak;
}

std::vector<bool> imu_outlier_mask(std::span<const double> ax,
                                   std::span<const double> ay,
                                   std::span<const double> az,
                                   const ImuOutlierConfig& cfg) {
  const std::size_t n = std::min({ax.size(), ay.size(), az.size()});
  std::vector<bool> mask(n, false);
  auto norm = [&](std::size_t i) {
    return std::sqrt(ax[i] * ax[i] + ay[i] * ay[i] + az[i] * az[i]);
  };
  auto step = [&](std::size_t i, std::size_t j) {
    double dx = ax[i] - ax[j], dy = ay[i] - ay[j], dz = az[i] - az[j];
    return std::sqrt(dx * dx + dy * dy + dz * dz);
  };
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(norm(i) - 1.0) > cfg.gravity_tolerance_g) {
      mask[i] = true;
      continue;
    }
    // Isolated glitch: a large step both into and out of the sample.
    if (i > 0 && i + 1 < n && step(i, i - 1) > cfg.jerk_threshold_g &&
        step(i + 1, i) > cfg.jerk_threshold_g) {
      mask[i] = true;
    }
  }
  return mask;
}

}  // namespace hypnos
