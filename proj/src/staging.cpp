#include "hypnos/staging.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "hypnos/errors.hpp"
#include "hypnos/rng.hpp"

namespace hypnos {

// ---------------------------------------------------------------------------
// Tensor container
// ---------------------------------------------------------------------------

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return shape.empty() ? 0 : n;
}

std::string tensors_to_text(const TensorMap& tensors) {
  std::ostringstream out;
  out.precision(17);
  out << "# hypnos tensors 1\n";
  for (const auto& [name, t] : tensors) {
    out << "tensor " << name << " " << t.shape.size();
    for (std::size_t d : t.shape) out << " " << d;
    out << "\n";
    for (std::size_t i = 0; i < t.data.size(); ++i)
      out << t.data[i] << ((i + 1) % 8 == 0 || i + 1 == t.data.size() ? "\n" : " ");
    if (t.data.empty()) out << "\n";
  }
  return out.str();
}

TensorMap tensors_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  TensorMap out;
  std::string word;
  std::istringstream body;
  // Token-level scan; the '#' header line is skipped.
  std::ostringstream stripped;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    stripped << line << "\n";
  }
  std::istringstream tokens(stripped.str());
  while (tokens >> word) {
    if (word != "tensor")
      raise(ErrorCode::FormatError, "tensor file: expected 'tensor', got '" + word + "'");
    std::string name;
    std::size_t rank = 0;
    if (!(tokens >> name >> rank))
      raise(ErrorCode::FormatError, "tensor file: bad header");
    Tensor t;
    t.shape.resize(rank);
    for (std::size_t i = 0; i < rank; ++i)
      if (!(tokens >> t.shape[i]))
        raise(ErrorCode::FormatError, "tensor file: bad shape for " + name);
    t.data.resize(t.numel());
    for (std::size_t i = 0; i < t.data.size(); ++i)
      if (!(tokens >> t.data[i]))
        raise(ErrorCode::FormatError, "tensor file: missing values for " + name);
    out[name] = std::move(t);
  }
  return out;
}

void write_tensors(const std::filesystem::path& path, const TensorMap& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << tensors_to_text(t);
}

TensorMap read_tensors(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return tensors_from_text(ss.str());
}

namespace {

const Tensor& need(const TensorMap& m, const std::string& name) {
  auto it = m.find(name);
  if (it == m.end())
    raise(ErrorCode::ShapeMismatch, "missing tensor '" + name + "'");
  return it->second;
}

void need_rank(const Tensor& t, std::size_t rank, const char* name) {
  if (t.shape.size() != rank || t.data.size() != t.numel())
    raise(ErrorCode::ShapeMismatch,
          std::string(name) + " has wrong rank or element count");
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// One PyTorch-convention GRU step (gate order r, z, n).
void gru_step(std::span<const double> x, std::vector<double>& h,
              const Tensor& w_ih, const Tensor& w_hh, const Tensor& b_ih,
              const Tensor& b_hh) {
  const std::size_t hd = h.size();
  const std::size_t in = x.size();
  std::vector<double> gi(3 * hd), gh(3 * hd);
  for (std::size_t g = 0; g < 3 * hd; ++g) {
    double acc = b_ih.data[g];
    const double* row = &w_ih.data[g * in];
    for (std::size_t i = 0; i < in; ++i) acc += row[i] * x[i];
    gi[g] = acc;
    acc = b_hh.data[g];
    row = &w_hh.data[g * hd];
    for (std::size_t i = 0; i < hd; ++i) acc += row[i] * h[i];
    gh[g] = acc;
  }
  for (std::size_t i = 0; i < hd; ++i) {
    double r = sigmoid(gi[i] + gh[i]);
    double z = sigmoid(gi[hd + i] + gh[hd + i]);
    double n = std::tanh(gi[2 * hd + i] + r * gh[2 * hd + i]);
    h[i] = (1.0 - z) * n + z * h[i];
  }
}

Tensor filled(std::vector<std::size_t> shape, double value) {
  Tensor t;
  t.shape = std::move(shape);
  t.data.assign(t.numel(), value);
  return t;
}

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double scale) {
  Tensor t;
  t.shape = std::move(shape);
  t.data.resize(t.numel());
  for (double& v : t.data) v = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

// ---------------------------------------------------------------------------
// PML
// ---------------------------------------------------------------------------

std::size_t PmlWeights::latent_dim() const {
  return conv_out_channels() * kPmlPoolGrid * kPmlPoolGrid + hidden_dim();
}

void PmlWeights::validate() const {
  need_rank(conv1_w, 4, "conv1.weight");
  need_rank(conv1_b, 1, "conv1.bias");
  need_rank(conv2_w, 4, "conv2.weight");
  need_rank(conv2_b, 1, "conv2.bias");
  need_rank(gru_w_ih, 2, "gru.w_ih");
  need_rank(gru_w_hh, 2, "gru.w_hh");
  need_rank(gru_b_ih, 1, "gru.b_ih");
  need_rank(gru_b_hh, 1, "gru.b_hh");
  need_rank(head_w, 2, "head.weight");
  need_rank(head_b, 1, "head.bias");

  if (conv1_w.shape[1] != 1)
    raise(ErrorCode::ShapeMismatch, "conv1 must take a single input plane");
  if (conv2_w.shape[1] != conv1_w.shape[0])
    raise(ErrorCode::ShapeMismatch, "conv2 input planes != conv1 output");
  if (conv1_b.shape[0] != conv1_w.shape[0] ||
      conv2_b.shape[0] != conv2_w.shape[0])
    raise(ErrorCode::ShapeMismatch, "conv bias size mismatch");

  const std::size_t hd = gru_w_hh.shape[1];
  if (gru_w_hh.shape[0] != 3 * hd || gru_w_ih.shape[0] != 3 * hd ||
      gru_w_ih.shape[1] != static_cast<std::size_t>(kFeatureCount) ||
      gru_b_ih.shape[0] != 3 * hd || gru_b_hh.shape[0] != 3 * hd)
    raise(ErrorCode::ShapeMismatch, "gru tensor shapes inconsistent");

  if (latent_dim() != kPmlLatentDim)
    raise(ErrorCode::ShapeMismatch,
          "latent dimension " + std::to_string(latent_dim()) + " != " +
              std::to_string(kPmlLatentDim));
  if (head_w.shape[0] != 4 || head_w.shape[1] != kPmlLatentDim ||
      head_b.shape[0] != 4)
    raise(ErrorCode::ShapeMismatch, "head must map 928 -> 4");
}

PmlWeights PmlWeights::from_tensors(const TensorMap& t) {
  PmlWeights w;
  w.conv1_w = need(t, "conv1.weight");
  w.conv1_b = need(t, "conv1.bias");
  w.conv2_w = need(t, "conv2.weight");
  w.conv2_b = need(t, "conv2.bias");
  w.gru_w_ih = need(t, "gru.w_ih");
  w.gru_w_hh = need(t, "gru.w_hh");
  w.gru_b_ih = need(t, "gru.b_ih");
  w.gru_b_hh = need(t, "gru.b_hh");
  w.head_w = need(t, "head.weight");
  w.head_b = need(t, "head.bias");
  w.validate();
  return w;
}

TensorMap PmlWeights::to_tensors() const {
  return {{"conv1.weight", conv1_w}, {"conv1.bias", conv1_b},
          {"conv2.weight", conv2_w}, {"conv2.bias", conv2_b},
          {"gru.w_ih", gru_w_ih},    {"gru.w_hh", gru_w_hh},
          {"gru.b_ih", gru_b_ih},    {"gru.b_hh", gru_b_hh},
          {"head.weight", head_w},   {"head.bias", head_b}};
}

PmlWeights PmlWeights::load(const std::filesystem::path& path) {
  return from_tensors(read_tensors(path));
}

namespace {

PmlWeights default_arch(double fill, std::uint64_t seed, bool random) {
  // conv 16 -> 32 channels, GRU hidden 128: 32*25 + 128 = 928.
  Rng rng(seed);
  auto make = [&](std::vector<std::size_t> shape) {
    return random ? random_tensor(std::move(shape), rng, 0.1)
                  : filled(std::move(shape), fill);
  };
  PmlWeights w;
  w.conv1_w = make({16, 1, 5, 5});
  w.conv1_b = make({16});
  w.conv2_w = make({32, 16, 3, 3});
  w.conv2_b = make({32});
  w.gru_w_ih = make({3 * 128, static_cast<std::size_t>(kFeatureCount)});
  w.gru_w_hh = make({3 * 128, 128});
  w.gru_b_ih = make({3 * 128});
  w.gru_b_hh = make({3 * 128});
  w.head_w = make({4, kPmlLatentDim});
  w.head_b = make({4});
  w.validate();
  return w;
}

}  // namespace

PmlWeights PmlWeights::zeros() { return default_arch(0.0, 0, false); }
PmlWeights PmlWeights::seeded(std::uint64_t seed) {
  return default_arch(0.0, seed, true);
}

void FeatureHistory::push(const FeatureVector38& v) {
  entries_.push_back(v);
  if (entries_.size() > kHistoryLen)
    entries_.erase(entries_.begin());
}

std::array<FeatureVector38, kHistoryLen> FeatureHistory::padded() const {
  std::array<FeatureVector38, kHistoryLen> out{};
  if (entries_.empty()) return out;
  const std::size_t pad = kHistoryLen - entries_.size();
  for (std::size_t i = 0; i < kHistoryLen; ++i)
    out[i] = i < pad ? entries_.front() : entries_[i - pad];
  return out;
}

namespace {

struct ConvPlanes {
  std::size_t channels = 0, h = 0, w = 0;
  std::vector<double> data;  // [c][h][w]

  double at(std::size_t c, std::size_t y, std::size_t x) const {
    return data[(c * h + y) * w + x];
  }
  double& at(std::size_t c, std::size_t y, std::size_t x) {
    return data[(c * h + y) * w + x];
  }
};

ConvPlanes conv2d_relu(const ConvPlanes& in, const Tensor& weight,
                       const Tensor& bias, std::size_t stride) {
  const std::size_t out_c = weight.shape[0];
  const std::size_t in_c = weight.shape[1];
  const std::size_t kh = weight.shape[2];
  const std::size_t kw = weight.shape[3];
  if (in_c != in.channels)
    raise(ErrorCode::ShapeMismatch, "conv input planes mismatch");
  if (in.h < kh || in.w < kw)
    raise(ErrorCode::ShapeMismatch, "spectrogram smaller than conv kernel");
  ConvPlanes out;
  out.channels = out_c;
  out.h = (in.h - kh) / stride + 1;
  out.w = (in.w - kw) / stride + 1;
  out.data.assign(out_c * out.h * out.w, 0.0);
  for (std::size_t o = 0; o < out_c; ++o) {
    for (std::size_t y = 0; y < out.h; ++y) {
      for (std::size_t x = 0; x < out.w; ++x) {
        double acc = bias.data[o];
        for (std::size_t i = 0; i < in_c; ++i) {
          for (std::size_t ky = 0; ky < kh; ++ky) {
            for (std::size_t kx = 0; kx < kw; ++kx) {
              acc += in.at(i, y * stride + ky, x * stride + kx) *
                     weight.data[((o * in_c + i) * kh + ky) * kw + kx];
            }
          }
        }
        out.at(o, y, x) = acc > 0.0 ? acc : 0.0;
      }
    }
  }
  return out;
}

std::vector<double> adaptive_avg_pool(const ConvPlanes& in, std::size_t grid) {
  std::vector<double> out(in.channels * grid * grid, 0.0);
  for (std::size_t c = 0; c < in.channels; ++c) {
    for (std::size_t gy = 0; gy < grid; ++gy) {
      std::size_t y0 = gy * in.h / grid;
      std::size_t y1 = ((gy + 1) * in.h + grid - 1) / grid;
      for (std::size_t gx = 0; gx < grid; ++gx) {
        std::size_t x0 = gx * in.w / grid;
        std::size_t x1 = ((gx + 1) * in.w + grid - 1) / grid;
        double acc = 0.0;
        std::size_t n = 0;
        for (std::size_t y = y0; y < y1 && y < in.h; ++y)
          for (std::size_t x = x0; x < x1 && x < in.w; ++x) {
            acc += in.at(c, y, x);
            ++n;
          }
        out[(c * grid + gy) * grid + gx] = n ? acc / static_cast<double>(n) : 0.0;
      }
    }
  }
  return out;
}

}  // namespace

StageDistribution pml_forward(const EpochSpectrogram& spec,
                              const FeatureHistory& history,
                              const PmlWeights& w) {
  w.validate();
  if (spec.n_time == 0 || spec.n_freq == 0)
    raise(ErrorCode::ShapeMismatch, "empty spectrogram");

  // Conv branch on log-compressed power.
  ConvPlanes in;
  in.channels = 1;
  in.h = spec.n_time;
  in.w = spec.n_freq;
  in.data.resize(spec.power.size());
  for (std::size_t i = 0; i < spec.power.size(); ++i)
    in.data[i] = std::log1p(spec.power[i]);
  ConvPlanes c1 = conv2d_relu(in, w.conv1_w, w.conv1_b, 2);
  ConvPlanes c2 = conv2d_relu(c1, w.conv2_w, w.conv2_b, 2);
  std::vector<double> conv_latent = adaptive_avg_pool(c2, kPmlPoolGrid);

  // Recurrent branch over the padded history, oldest first.
  std::vector<double> h(w.hidden_dim(), 0.0);
  for (const FeatureVector38& fv : history.padded())
    gru_step(std::span<const double>(fv.data(), fv.size()), h, w.gru_w_ih,
             w.gru_w_hh, w.gru_b_ih, w.gru_b_hh);

  std::vector<double> latent;
  latent.reserve(kPmlLatentDim);
  latent.insert(latent.end(), conv_latent.begin(), conv_latent.end());
  latent.insert(latent.end(), h.begin(), h.end());
  if (latent.size() != kPmlLatentDim)
    raise(ErrorCode::ShapeMismatch, "latent concatenation != 928");

  std::array<double, 4> logits{};
  for (int o = 0; o < 4; ++o) {
    double acc = w.head_b.data[o];
    const double* row = &w.head_w.data[static_cast<std::size_t>(o) * kPmlLatentDim];
    for (std::size_t i = 0; i < kPmlLatentDim; ++i) acc += row[i] * latent[i];
    logits[o] = acc;
  }
  return softmax4(logits);
}

// ---------------------------------------------------------------------------
// Baseline scorer and ensembling
// ---------------------------------------------------------------------------

StageDistribution baseline_stage(const RspBands& rsp, const FeatureVector38& fv,
                                 const BaselineParams& p) {
  const double alpha_dom = rsp.alpha - std::max(rsp.delta, rsp.theta);
  const double delta_dom = rsp.delta - std::max(rsp.theta, rsp.alpha);
  const double theta_dom = rsp.theta - std::max(rsp.delta, rsp.alpha);
  const double emg_rms = fv[30];
  const double eog_events = fv[28];
  const double emg_hi = sigmoid((emg_rms - p.emg_mid_uv) / p.emg_scale_uv);
  const double eog_act =
      sigmoid((eog_events - p.eog_mid_count) / p.eog_scale_count);

  std::array<double, 4> scores{};
  scores[0] = p.w_alpha * (alpha_dom - p.alpha_offset) +
              p.w_emg_wake * (emg_hi - 0.5);
  scores[1] = 0.0;  // Light is the residual
  scores[2] = p.w_delta * (delta_dom - p.delta_offset);
  scores[3] = p.w_theta * (theta_dom - p.theta_offset) +
              p.w_emg_rem * (0.5 - emg_hi) + p.w_eog_rem * (eog_act - 0.5);
  for (double& s : scores) s *= p.temperature;
  return softmax4(scores);
}

StageDistribution ensemble(std::span<const StageDistribution> dists) {
  if (dists.empty()) raise(ErrorCode::EmptyEnsemble, "no distributions");
  StageDistribution out;
  out.p = {0.0, 0.0, 0.0, 0.0};
  for (const auto& d : dists)
    for (int i = 0; i < 4; ++i) out.p[i] += d.p[i];
  for (double& v : out.p) v /= static_cast<double>(dists.size());
  return out;
}

// ---------------------------------------------------------------------------
// SML
// ---------------------------------------------------------------------------

const std::array<const char*, kSmlFeatureCount> kSmlFeatureNames = {
    "hr_mean",         "hr_std",          "hr_min",
    "hr_max",          "hr_slope",        "rr_mean",
    "rr_std",          "rr_min",          "rr_max",
    "rr_slope",        "sdnn",            "rmssd",
    "activity_mean",   "activity_max",    "stillness_fraction",
    "posture_changes", "accel_mag_std",   "accel_std_x",
    "accel_std_y",     "accel_std_z",     "hr_delta_baseline",
    "movement_delta_baseline", "minutes_since_major_move", "epoch_index_norm"};

namespace {

struct SeriesStats {
  double mean = 0.0, stddev = 0.0, min = 0.0, max = 0.0, slope = 0.0;
};

// slope is per-index least squares, rescaled by samples_per_minute.
SeriesStats series_stats(const std::vector<double>& x, double per_minute) {
  SeriesStats s;
  if (x.empty()) return s;
  s.min = *std::min_element(x.begin(), x.end());
  s.max = *std::max_element(x.begin(), x.end());
  s.mean = std::accumulate(x.begin(), x.end(), 0.0) /
           static_cast<double>(x.size());
  double var = 0.0;
  for (double v : x) var += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(var / static_cast<double>(x.size()));
  const std::size_t n = x.size();
  if (n >= 2) {
    double tm = (static_cast<double>(n) - 1.0) / 2.0;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double dt = static_cast<double>(i) - tm;
      num += dt * (x[i] - s.mean);
      den += dt * dt;
    }
    s.slope = den > 0.0 ? num / den * per_minute : 0.0;
  }
  return s;
}

double stddev_of(std::span<const double> x, const std::vector<bool>& mask) {
  double mean = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < mask.size() && mask[i]) continue;
    mean += x[i];
    ++n;
  }
  if (n < 2) return 0.0;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i < mask.size() && mask[i]) continue;
    var += (x[i] - mean) * (x[i] - mean);
  }
  return std::sqrt(var / static_cast<double>(n));
}

}  // namespace

SmlFeatures sml_features(const SmlWindow& w) {
  if (w.hr_bpm.empty() || w.imu_y.size() < static_cast<std::size_t>(59.0 * w.fs_imu))
    raise(ErrorCode::InsufficientContext, "need 60 s of HR and IMU context");

  SmlFeatures f;
  int i = 0;
  // HR slope: samples every 5 s -> 12 per minute.
  SeriesStats hr = series_stats(w.hr_bpm, 12.0);
  f.v[i++] = hr.mean;
  f.v[i++] = hr.stddev;
  f.v[i++] = hr.min;
  f.v[i++] = hr.max;
  f.v[i++] = hr.slope;
  SeriesStats rr = series_stats(w.rr_brpm, 1.0);
  f.v[i++] = rr.mean;
  f.v[i++] = rr.stddev;
  f.v[i++] = rr.min;
  f.v[i++] = rr.max;
  f.v[i++] = rr.slope;

  std::vector<double> ibi(w.hr_bpm.size());
  for (std::size_t k = 0; k < ibi.size(); ++k)
    ibi[k] = w.hr_bpm[k] > 0.0 ? 60.0 / w.hr_bpm[k] : 0.0;
  f.v[i++] = series_stats(ibi, 1.0).stddev * 1000.0;  // SDNN in ms
  double rmssd = 0.0;
  if (ibi.size() >= 2) {
    for (std::size_t k = 1; k < ibi.size(); ++k)
      rmssd += (ibi[k] - ibi[k - 1]) * (ibi[k] - ibi[k - 1]);
    rmssd = std::sqrt(rmssd / static_cast<double>(ibi.size() - 1)) * 1000.0;
  }
  f.v[i++] = rmssd;

  // Per-5s activity counts = flagged IMU samples.
  const std::size_t slot = static_cast<std::size_t>(std::lround(5.0 * w.fs_imu));
  std::vector<double> counts;
  for (std::size_t start = 0; start + slot <= w.imu_mask.size(); start += slot) {
    double c = 0.0;
    for (std::size_t k = start; k < start + slot; ++k)
      if (w.imu_mask[k]) c += 1.0;
    counts.push_back(c);
  }
  SeriesStats act = series_stats(counts, 1.0);
  double still = 0.0;
  for (double c : counts)
    if (c == 0.0) still += 1.0;
  still = counts.empty() ? 1.0 : still / static_cast<double>(counts.size());
  f.v[i++] = act.mean;
  f.v[i++] = act.max;
  f.v[i++] = still;
  f.v[i++] = static_cast<double>(w.posture_changes);

  std::vector<double> mag(w.imu_y.size());
  for (std::size_t k = 0; k < mag.size(); ++k) {
    double x = k < w.imu_x.size() ? w.imu_x[k] : 0.0;
    double z = k < w.imu_z.size() ? w.imu_z[k] : 0.0;
    mag[k] = std::sqrt(x * x + w.imu_y[k] * w.imu_y[k] + z * z);
  }
  f.v[i++] = stddev_of(mag, w.imu_mask);
  f.v[i++] = stddev_of(w.imu_x, w.imu_mask);
  f.v[i++] = stddev_of(w.imu_y, w.imu_mask);
  f.v[i++] = stddev_of(w.imu_z, w.imu_mask);

  double hr_base = w.hr_trailing.empty()
                       ? hr.mean
                       : std::accumulate(w.hr_trailing.begin(),
                                         w.hr_trailing.end(), 0.0) /
                             static_cast<double>(w.hr_trailing.size());
  f.v[i++] = hr.mean - hr_base;
  double act_base = w.activity_trailing.empty()
                        ? act.mean
                        : std::accumulate(w.activity_trailing.begin(),
                                          w.activity_trailing.end(), 0.0) /
                              static_cast<double>(w.activity_trailing.size());
  f.v[i++] = act.mean - act_base;
  f.v[i++] = w.minutes_since_major_move;
  f.v[i++] = w.epoch_index_norm;
  return f;
}

void SmlWeights::validate() const {
  need_rank(gru_w_ih, 2, "gru.w_ih");
  need_rank(gru_w_hh, 2, "gru.w_hh");
  need_rank(gru_b_ih, 1, "gru.b_ih");
  need_rank(gru_b_hh, 1, "gru.b_hh");
  need_rank(head_w, 2, "head.weight");
  need_rank(head_b, 1, "head.bias");
  const std::size_t hd = gru_w_hh.shape[1];
  if (gru_w_hh.shape[0] != 3 * hd || gru_w_ih.shape[0] != 3 * hd ||
      gru_w_ih.shape[1] != static_cast<std::size_t>(kSmlFeatureCount) ||
      gru_b_ih.shape[0] != 3 * hd || gru_b_hh.shape[0] != 3 * hd ||
      head_w.shape[0] != 4 || head_w.shape[1] != hd || head_b.shape[0] != 4)
    raise(ErrorCode::ShapeMismatch, "sml tensor shapes inconsistent");
}

SmlWeights SmlWeights::from_tensors(const TensorMap& t) {
  SmlWeights w;
  w.gru_w_ih = need(t, "gru.w_ih");
  w.gru_w_hh = need(t, "gru.w_hh");
  w.gru_b_ih = need(t, "gru.b_ih");
  w.gru_b_hh = need(t, "gru.b_hh");
  w.head_w = need(t, "head.weight");
  w.head_b = need(t, "head.bias");
  w.validate();
  return w;
}

TensorMap SmlWeights::to_tensors() const {
  return {{"gru.w_ih", gru_w_ih}, {"gru.w_hh", gru_w_hh},
          {"gru.b_ih", gru_b_ih}, {"gru.b_hh", gru_b_hh},
          {"head.weight", head_w}, {"head.bias", head_b}};
}

SmlWeights SmlWeights::load(const std::filesystem::path& path) {
  return from_tensors(read_tensors(path));
}

namespace {

SmlWeights sml_arch(std::uint64_t seed, bool random) {
  Rng rng(seed);
  auto make = [&](std::vector<std::size_t> shape) {
    return random ? random_tensor(std::move(shape), rng, 0.1)
                  : filled(std::move(shape), 0.0);
  };
  SmlWeights w;
  w.gru_w_ih = make({3 * 32, static_cast<std::size_t>(kSmlFeatureCount)});
  w.gru_w_hh = make({3 * 32, 32});
  w.gru_b_ih = make({3 * 32});
  w.gru_b_hh = make({3 * 32});
  w.head_w = make({4, 32});
  w.head_b = make({4});
  w.validate();
  return w;
}

}  // namespace

SmlWeights SmlWeights::zeros() { return sml_arch(0, false); }
SmlWeights SmlWeights::seeded(std::uint64_t seed) { return sml_arch(seed, true); }

StageDistribution sml_forward(const SmlFeatures& f, const SmlWeights& w,
                              std::vector<double>& hidden) {
  w.validate();
  if (hidden.size() != w.hidden_dim())
    raise(ErrorCode::ShapeMismatch, "hidden state size mismatch");
  gru_step(std::span<const double>(f.v.data(), f.v.size()), hidden, w.gru_w_ih,
           w.gru_w_hh, w.gru_b_ih, w.gru_b_hh);
  std::array<double, 4> logits{};
  const std::size_t hd = hidden.size();
  for (int o = 0; o < 4; ++o) {
    double acc = w.head_b.data[o];
    const double* row = &w.head_w.data[static_cast<std::size_t>(o) * hd];
    for (std::size_t i = 0; i < hd; ++i) acc += row[i] * hidden[i];
    logits[o] = acc;
  }
  return softmax4(logits);
}

StageDistribution baseline_sml_stage(const SmlFeatures& f,
                                     const SmlBaselineParams& p) {
  const double hr = f.v[0];
  const double rr_std = f.v[6];
  const double act_max = f.v[13];
  const double movement = std::min(1.0, act_max / p.activity_ref);

  std::array<double, 4> scores{};
  scores[0] = p.w_move * movement +
              p.w_hr_wake * sigmoid((hr - p.hr_wake_mid) / p.hr_wake_scale);
  scores[1] = p.light_floor;
  scores[2] = p.w_deep * sigmoid((p.hr_deep_mid - hr) / p.hr_deep_scale);
  scores[3] = (p.w_rem * sigmoid((hr - p.hr_rem_lo) / p.hr_rem_scale) *
                   sigmoid((p.hr_rem_hi - hr) / p.hr_rem_scale) +
               p.w_rem_rr * sigmoid((rr_std - p.rr_std_mid) / p.rr_std_scale)) *
              (1.0 - movement);
  for (double& s : scores) s *= p.temperature;
  return softmax4(scores);
}

}  // namespace hypnos
