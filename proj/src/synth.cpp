#include "hypnos/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hypnos/errors.hpp"
#include "hypnos/rng.hpp"

namespace hypnos {

void SessionSpec::validate() const {
  if (light_frac < 0.0 || deep_frac < 0.0 || rem_frac < 0.0 ||
      light_frac + deep_frac + rem_frac > 1.0 + 1e-12)
    raise(ErrorCode::InfeasibleProportions,
          "stage fractions must be non-negative and sum to <= 1");
  if (n_epochs == 0)
    raise(ErrorCode::InfeasibleProportions, "n_epochs must be positive");
}

// ---------------------------------------------------------------------------
// Hypnogram generation
// ---------------------------------------------------------------------------

Hypnogram gen_hypnogram(const SessionSpec& spec) {
  spec.validate();
  Rng rng = Rng(spec.seed).fork(11);

  Hypnogram h;
  h.stages.assign(spec.n_epochs, SleepStage::Wake);
  const std::size_t sol = std::min(spec.sol_epoch, spec.n_epochs);
  const std::size_t post = spec.n_epochs - sol;
  if (post == 0) return h;

  // Epoch quotas for the post-onset block (largest-remainder rounding).
  std::array<double, 4> frac = {
      1.0 - spec.light_frac - spec.deep_frac - spec.rem_frac, spec.light_frac,
      spec.deep_frac, spec.rem_frac};
  std::array<std::size_t, 4> quota{};
  std::size_t assigned = 0;
  std::array<std::pair<double, int>, 4> rem;
  for (int s = 0; s < 4; ++s) {
    double want = frac[s] * static_cast<double>(post);
    quota[s] = static_cast<std::size_t>(std::floor(want));
    assigned += quota[s];
    rem[s] = {want - std::floor(want), s};
  }
  std::sort(rem.begin(), rem.end(), [](auto& a, auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t k = 0; assigned < post; ++k, ++assigned)
    ++quota[static_cast<std::size_t>(rem[k % 4].second)];

  // Mean dwell per stage, in epochs.
  const std::array<double, 4> dwell = {2.0, 12.0, 10.0, 9.0};

  std::size_t e = sol;
  int current = 1;  // the night always enters sleep through Light
  if (quota[1] == 0) {
    for (int s = 0; s < 4; ++s)
      if (quota[s] > 0) current = s;
  }
  while (e < spec.n_epochs) {
    std::size_t want = 1 + static_cast<std::size_t>(std::floor(
                               -dwell[current] * std::log(1.0 - rng.uniform() + 1e-12)));
    std::size_t run = std::min({want, quota[current] == 0 ? std::size_t(1) : quota[current],
                                spec.n_epochs - e});
    if (run == 0) run = 1;
    for (std::size_t k = 0; k < run && e < spec.n_epochs; ++k, ++e)
      h.stages[e] = static_cast<SleepStage>(current);
    if (quota[current] >= run)
      quota[current] -= run;
    else
      quota[current] = 0;

    double total_left = 0.0;
    for (int s = 0; s < 4; ++s)
      if (s != current) total_left += static_cast<double>(quota[s]);
    if (total_left <= 0.0) continue;  // keep the current stage to the end
    double pick = rng.uniform() * total_left;
    int next = current;
    for (int s = 0; s < 4; ++s) {
      if (s == current || quota[s] == 0) continue;
      if (pick < static_cast<double>(quota[s])) {
        next = s;
        break;
      }
      pick -= static_cast<double>(quota[s]);
    }
    current = next;
  }
  return h;
}

// ---------------------------------------------------------------------------
// ExG generation
// ---------------------------------------------------------------------------

namespace {

// Sum of equal-amplitude sinusoids spread over [flo, fhi]; phases fixed per
// (channel, component) for the whole session. Evaluated with a rotation
// recurrence, scaled to the requested RMS, optionally gated by an envelope.
struct ToneBank {
  std::vector<double> omega;  // rad/sample
  std::vector<double> phase;
  double amp = 0.0;

  ToneBank() = default;
  ToneBank(double flo, double fhi, double df, double fs, Rng& rng) {
    for (double f = flo; f <= fhi + 1e-9; f += df) {
      omega.push_back(2.0 * M_PI * f / fs);
      phase.push_back(rng.uniform(0.0, 2.0 * M_PI));
    }
    amp = std::sqrt(2.0 / static_cast<double>(omega.size()));
  }

  // x[k] += rms * envelope[k] * bank(t0 + k/fs)
  void add(std::vector<double>& x, std::size_t offset, std::size_t n,
           double t0_samples, double rms,
           const std::vector<double>* envelope) const {
    double* dst = x.data() + offset;
    const double* env = envelope ? envelope->data() : nullptr;
    for (std::size_t j = 0; j < omega.size(); ++j) {
      const double theta0 = omega[j] * t0_samples + phase[j];
      double s = std::sin(theta0);
      double c = std::cos(theta0);
      const double sd = std::sin(omega[j]);
      const double cd = std::cos(omega[j]);
      const double a = rms * amp;
      if (env) {
        for (std::size_t k = 0; k < n; ++k) {
          dst[k] += a * env[k] * s;
          double ns = s * cd + c * sd;
          c = c * cd - s * sd;
          s = ns;
        }
      } else {
        for (std::size_t k = 0; k < n; ++k) {
          dst[k] += a * s;
          double ns = s * cd + c * sd;
          c = c * cd - s * sd;
          s = ns;
        }
      }
    }
  }
};

// Smooth gate with cosine ramps, used for alpha bursts and spindles.
void add_gate(std::vector<double>& env, double fs, double t_on, double t_off,
              double ramp_s) {
  const std::size_t n = env.size();
  auto idx = [&](double t) { return t * fs; };
  for (std::size_t k = 0; k < n; ++k) {
    double t = static_cast<double>(k);
    double a0 = idx(t_on), a1 = idx(t_on + ramp_s);
    double b0 = idx(t_off - ramp_s), b1 = idx(t_off);
    double g = 0.0;
    if (t >= a1 && t <= b0) {
      g = 1.0;
    } else if (t >= a0 && t < a1) {
      g = 0.5 - 0.5 * std::cos(M_PI * (t - a0) / (a1 - a0));
    } else if (t > b0 && t <= b1) {
      g = 0.5 + 0.5 * std::cos(M_PI * (t - b0) / (b1 - b0));
    }
    env[k] = std::max(env[k], g);
  }
}

// Smoothed rectangular pulse (50 ms ramps): saccades and blinks.
void add_pulse(std::vector<double>& x, std::size_t offset, double fs,
               double t_start, double duration, double amplitude) {
  const std::size_t n0 = static_cast<std::size_t>(t_start * fs);
  const std::size_t len = static_cast<std::size_t>(duration * fs);
  const std::size_t ramp =
      std::max<std::size_t>(1, static_cast<std::size_t>(0.05 * fs));
  for (std::size_t k = 0; k < len && offset + n0 + k < x.size(); ++k) {
    double g = 1.0;
    if (k < ramp)
      g = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(k) / static_cast<double>(ramp));
    else if (len - k <= ramp)
      g = 0.5 - 0.5 * std::cos(M_PI * static_cast<double>(len - k) / static_cast<double>(ramp));
    x[offset + n0 + k] += amplitude * g;
  }
}

// Biphasic slow transient for K-complexes, ~0.9 s.
void add_k_complex(std::vector<double>& x, std::size_t offset, double fs,
                   double t_start, double amplitude) {
  const std::size_t len = static_cast<std::size_t>(0.9 * fs);
  const std::size_t n0 = static_cast<std::size_t>(t_start * fs);
  for (std::size_t k = 0; k < len && offset + n0 + k < x.size(); ++k) {
    double tau = static_cast<double>(k) / fs;
    double v = -std::exp(-std::pow((tau - 0.25) / 0.12, 2.0)) +
               0.6 * std::exp(-std::pow((tau - 0.55) / 0.18, 2.0));
    x[offset + n0 + k] += amplitude * v;
  }
}

struct StageLevels {
  double delta, theta, alpha, sigma, emg;
};

StageLevels stage_levels(SleepStage s) {
  switch (s) {
    case SleepStage::Wake: return {3.0, 4.0, 18.0, 0.5, 10.0};
    case SleepStage::Light: return {6.5, 5.5, 4.5, 0.5, 4.0};
    case SleepStage::Deep: return {40.0, 6.0, 2.0, 0.5, 2.5};
    case SleepStage::Rem: return {4.0, 14.0, 3.0, 0.5, 1.5};
    default: return {3.0, 3.0, 3.0, 0.5, 3.0};
  }
}

}  // namespace

std::array<std::vector<double>, kNumExgChannels> gen_exg(const Hypnogram& h,
                                                         std::uint64_t seed,
                                                         double fs) {
  const std::size_t epoch_n = static_cast<std::size_t>(std::lround(30.0 * fs));
  const std::size_t total = epoch_n * h.size();

  // Per-channel overall, eye and muscle gains (frontal channels see the eyes,
  // over-the-ear channels sit near the temporalis).
  const std::array<double, 6> gain = {1.0, 0.95, 1.05, 0.9, 1.0, 0.98};
  const std::array<double, 6> eog_gain = {1.30, 1.22, -0.48, -0.52, -0.62, -0.70};
  const std::array<double, 6> emg_gain = {0.8, 0.85, 1.2, 1.15, 1.0, 1.0};

  Rng master = Rng(seed).fork(23);
  std::array<std::vector<double>, kNumExgChannels> out;

  struct ChannelBanks {
    ToneBank delta, theta, alpha, sigma, emg;
    Rng noise;
  };
  std::vector<ChannelBanks> banks;
  banks.reserve(kNumExgChannels);
  for (int c = 0; c < kNumExgChannels; ++c) {
    Rng pr = master.fork(static_cast<std::uint64_t>(c));
    ChannelBanks b{ToneBank(0.5, 2.0, 0.5, fs, pr),
                   ToneBank(4.0, 7.5, 0.5, fs, pr),
                   ToneBank(8.0, 12.0, 0.5, fs, pr),
                   ToneBank(12.5, 14.5, 0.5, fs, pr),
                   ToneBank(20.0, 45.0, 2.5, fs, pr),
                   master.fork(100 + static_cast<std::uint64_t>(c))};
    banks.push_back(std::move(b));
    out[c].assign(total, 0.0);
  }

  // Shared per-epoch event plan so all channels carry the same hallmarks.
  Rng events = master.fork(57);
  std::vector<double> env(epoch_n);

  for (std::size_t e = 0; e < h.size(); ++e) {
    const SleepStage stage = h[e];
    const StageLevels lv = stage_levels(stage);
    const std::size_t off = e * epoch_n;
    const double t0 = static_cast<double>(off);

    // Wake: alpha comes in bursts covering most of the epoch.
    bool gated_alpha = stage == SleepStage::Wake;
    if (gated_alpha) {
      std::fill(env.begin(), env.end(), 0.0);
      double t = events.uniform(0.0, 0.5);
      while (t < 30.0) {
        double on = events.uniform(1.5, 3.0);
        add_gate(env, fs, t, std::min(30.0, t + on), 0.1);
        t += on + events.uniform(0.4, 1.0);
      }
    }

    // Light: spindle bursts and an occasional K-complex.
    bool spindles = stage == SleepStage::Light;
    std::vector<double> spindle_env;
    if (spindles) {
      spindle_env.assign(epoch_n, 0.0);
      int n_spindles = 2 + (events.uniform() < 0.5 ? 1 : 0);
      for (int k = 0; k < n_spindles; ++k) {
        double start = events.uniform(0.5, 28.0);
        add_gate(spindle_env, fs, start, start + events.uniform(0.5, 1.0), 0.15);
      }
    }
    double k_time = -1.0, k_amp = 0.0;
    if (stage == SleepStage::Light && events.uniform() < 0.65) {
      k_time = events.uniform(1.0, 28.0);
      k_amp = events.uniform(26.0, 38.0);
    }

    // REM saccades / Wake blinks, as (start, duration, amplitude).
    std::vector<std::array<double, 3>> eye_events;
    if (stage == SleepStage::Rem) {
      int n_sac = 4 + static_cast<int>(events.uniform(0.0, 10.0));
      for (int k = 0; k < n_sac; ++k) {
        double sgn = events.uniform() < 0.5 ? -1.0 : 1.0;
        eye_events.push_back({events.uniform(0.2, 29.2),
                              events.uniform(0.2, 0.35),
                              sgn * events.uniform(16.0, 26.0)});
      }
    } else if (stage == SleepStage::Wake) {
      int n_blink = 2 + static_cast<int>(events.uniform(0.0, 8.0));
      for (int k = 0; k < n_blink; ++k)
        eye_events.push_back({events.uniform(0.2, 29.4),
                              events.uniform(0.2, 0.3),
                              events.uniform(25.0, 42.0)});
    }

    for (int c = 0; c < kNumExgChannels; ++c) {
      auto& ch = out[c];
      auto& b = banks[static_cast<std::size_t>(c)];
      const double g = gain[c];
      b.delta.add(ch, off, epoch_n, t0, g * lv.delta, nullptr);
      b.theta.add(ch, off, epoch_n, t0, g * lv.theta, nullptr);
      b.alpha.add(ch, off, epoch_n, t0, g * lv.alpha,
                  gated_alpha ? &env : nullptr);
      b.sigma.add(ch, off, epoch_n, t0, g * (spindles ? 15.0 : lv.sigma),
                  spindles ? &spindle_env : nullptr);
      b.emg.add(ch, off, epoch_n, t0, emg_gain[c] * lv.emg, nullptr);
      if (k_time >= 0.0)
        add_k_complex(ch, off, fs, k_time, eog_gain[c] * k_amp);
      for (const auto& ev : eye_events)
        add_pulse(ch, off, fs, ev[0], ev[1], eog_gain[c] * ev[2]);
      for (std::size_t k = 0; k < epoch_n; ++k)
        ch[off + k] += b.noise.normal(0.0, 2.0);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Full session generation
// ---------------------------------------------------------------------------

namespace {

double stage_hr(SleepStage s) {
  switch (s) {
    case SleepStage::Wake: return 72.0;
    case SleepStage::Light: return 62.0;
    case SleepStage::Deep: return 56.0;
    case SleepStage::Rem: return 68.0;
    default: return 65.0;
  }
}

double stage_rr(SleepStage s) {
  switch (s) {
    case SleepStage::Wake: return 15.0;
    case SleepStage::Light: return 13.0;
    case SleepStage::Deep: return 11.0;
    case SleepStage::Rem: return 16.0;
    default: return 14.0;
  }
}

struct Vec3 {
  double x, y, z;
};

Vec3 posture_gravity(Posture p) {
  switch (p) {
    case Posture::Supine: return {0.0, 0.0, 1.0};
    case Posture::Prone: return {0.0, 0.0, -1.0};
    case Posture::LeftSide: return {1.0, 0.0, 0.0};
    case Posture::RightSide: return {-1.0, 0.0, 0.0};
    case Posture::Upright: return {0.0, 1.0, 0.0};
  }
  return {0.0, 0.0, 1.0};
}

// Pulse waveform over one beat: systolic peak plus a dicrotic bump.
double pulse_shape(double u) {
  return std::exp(-std::pow((u - 0.18) / 0.07, 2.0)) +
         0.35 * std::exp(-std::pow((u - 0.50) / 0.10, 2.0));
}

}  // namespace

void inject_artifact(SessionRecording& rec, const ArtifactSpan& span) {
  const double dur = rec.duration_s();
  if (span.t0_s < 0.0 || span.t1_s <= span.t0_s || span.t1_s > dur + 1e-9)
    raise(ErrorCode::SpanOutOfRange, "artifact span outside the session");

  std::vector<int> channels = span.channels;
  if (channels.empty())
    for (int c = 0; c < kNumExgChannels; ++c) channels.push_back(c);

  const auto i0 = static_cast<std::size_t>(span.t0_s * rec.fs_exg);
  const auto i1 = std::min(static_cast<std::size_t>(span.t1_s * rec.fs_exg),
                           rec.exg[0].size());

  if (span.kind == "flatline") {
    for (int c : channels) {
      double hold = i0 > 0 ? rec.exg[c][i0 - 1] : 0.0;
      for (std::size_t i = i0; i < i1; ++i) rec.exg[c][i] = hold;
    }
  } else if (span.kind == "saturation") {
    for (int c : channels) {
      for (std::size_t i = i0; i < i1; ++i) {
        double t = static_cast<double>(i) / rec.fs_exg;
        rec.exg[c][i] = std::fmod(t, 1.0) < 0.5 ? 500.0 : -500.0;
      }
    }
  } else if (span.kind == "line_noise") {
    double amp = span.magnitude > 0.0 ? span.magnitude : 30.0;
    for (int c : channels) {
      for (std::size_t i = i0; i < i1; ++i) {
        double t = static_cast<double>(i) / rec.fs_exg;
        rec.exg[c][i] += amp * std::sin(2.0 * M_PI * 50.0 * t);
      }
    }
  } else if (span.kind == "movement") {
    // Large low-frequency excursions on the electrodes plus an IMU burst.
    Rng rng(0x9e3779b9ULL ^ static_cast<std::uint64_t>(span.t0_s * 1000.0));
    for (int c : channels) {
      double ph = rng.uniform(0.0, 2.0 * M_PI);
      double f = rng.uniform(0.6, 2.2);
      for (std::size_t i = i0; i < i1; ++i) {
        double t = static_cast<double>(i) / rec.fs_exg;
        rec.exg[c][i] += 260.0 * std::sin(2.0 * M_PI * f * t + ph) +
                         rng.normal(0.0, 40.0);
      }
    }
    const auto j0 = static_cast<std::size_t>(span.t0_s * rec.fs_imu);
    const auto j1 = std::min(static_cast<std::size_t>(span.t1_s * rec.fs_imu),
                             rec.imu[0].size());
    for (std::size_t j = j0; j < j1; ++j)
      for (int a = 0; a < kNumImuAxes; ++a)
        rec.imu[a][j] += rng.uniform(-0.9, 0.9);
  } else {
    raise(ErrorCode::ConfigError, "unknown artifact kind '" + span.kind + "'");
  }
}

SyntheticSession generate_session(const SessionSpec& spec) {
  spec.validate();
  SyntheticSession s;
  s.truth.seed = spec.seed;
  s.truth.hypnogram = gen_hypnogram(spec);
  const Hypnogram& h = s.truth.hypnogram;
  s.truth.sol_epoch = sol_from_hypnogram(h, 1);

  SessionRecording& rec = s.recording;
  rec.fs_exg = spec.fs_exg;
  rec.fs_ppg = spec.fs_ppg;
  rec.fs_imu = spec.fs_imu;
  rec.exg = gen_exg(h, spec.seed, spec.fs_exg);

  Rng master(spec.seed);
  Rng hr_rng = master.fork(31);
  Rng rr_rng = master.fork(37);
  Rng ppg_rng = master.fork(41);
  Rng imu_rng = master.fork(43);
  Rng move_rng = master.fork(47);

  const std::size_t n_epochs = h.size();
  const double duration = static_cast<double>(n_epochs) * 30.0;

  // Per-epoch HR / RR profiles (piecewise constant).
  std::vector<double> hr_epoch(n_epochs), rr_epoch(n_epochs);
  for (std::size_t e = 0; e < n_epochs; ++e) {
    if (spec.hr_const_bpm) {
      hr_epoch[e] = *spec.hr_const_bpm;
    } else if (spec.stage_modulated_vitals) {
      hr_epoch[e] = stage_hr(h[e]) +
                    1.5 * std::sin(2.0 * M_PI * static_cast<double>(e) / 240.0) +
                    hr_rng.normal(0.0, 0.4);
    } else {
      hr_epoch[e] = 64.0 + hr_rng.normal(0.0, 0.4);
    }
    if (spec.rr_const_brpm) {
      rr_epoch[e] = *spec.rr_const_brpm;
    } else if (spec.stage_modulated_vitals) {
      double jitter_scale = h[e] == SleepStage::Rem ? 0.8 : 0.25;
      rr_epoch[e] = stage_rr(h[e]) + rr_rng.normal(0.0, jitter_scale);
    } else {
      rr_epoch[e] = 14.0 + rr_rng.normal(0.0, 0.25);
    }
  }

  // Truth logs at the sensor-window cadences.
  for (std::size_t w = 0; w * 5 < static_cast<std::size_t>(duration); ++w)
    s.truth.hr_bpm_per_5s.push_back(hr_epoch[std::min(n_epochs - 1, w / 6)]);
  for (std::size_t w = 0; w * 60 < static_cast<std::size_t>(duration); ++w) {
    std::size_t e = std::min(n_epochs - 1, w * 2);
    std::size_t e2 = std::min(n_epochs - 1, e + 1);
    s.truth.rr_brpm_per_60s.push_back(0.5 * (rr_epoch[e] + rr_epoch[e2]));
  }

  // --- PPG: beat train at the instantaneous HR ---
  const std::size_t n_ppg = static_cast<std::size_t>(duration * spec.fs_ppg);
  const std::array<double, 3> ppg_amp = {100.0, 80.0, 60.0};
  for (int c = 0; c < kNumPpgChannels; ++c) rec.ppg[c].assign(n_ppg, 0.0);
  {
    double beat_t = 0.0;
    std::vector<std::pair<double, double>> beats;  // (start, period)
    while (beat_t < duration) {
      std::size_t e = std::min(
          n_epochs - 1, static_cast<std::size_t>(beat_t / 30.0));
      double period = 60.0 / hr_epoch[e];
      beats.emplace_back(beat_t, period);
      beat_t += period;
    }
    for (std::size_t i = 0; i < n_ppg; ++i) {
      double t = static_cast<double>(i) / spec.fs_ppg;
      auto it = std::upper_bound(
          beats.begin(), beats.end(), std::make_pair(t, 1e18));
      double v = 0.0;
      if (it != beats.begin()) {
        auto& [bt, period] = *(it - 1);
        v = pulse_shape((t - bt) / period);
      }
      double wander = 4.0 * std::sin(2.0 * M_PI * 0.05 * t);
      for (int c = 0; c < kNumPpgChannels; ++c)
        rec.ppg[c][i] =
            ppg_amp[c] * v + wander + ppg_rng.normal(0.0, 1.5);
    }
  }

  // --- IMU: gravity by posture, breathing ripple on Y, movement bursts ---
  const std::size_t n_imu = static_cast<std::size_t>(duration * spec.fs_imu);
  for (int a = 0; a < kNumImuAxes; ++a) rec.imu[a].assign(n_imu, 0.0);

  std::vector<std::pair<std::size_t, Posture>> schedule = spec.posture_schedule;
  if (schedule.empty()) schedule.push_back({0, Posture::Supine});
  std::sort(schedule.begin(), schedule.end());
  if (schedule.front().first != 0)
    schedule.insert(schedule.begin(), {0, schedule.front().second});
  s.truth.posture_changes = schedule;

  // Movement plan: posture changes always move; wake epochs often do.
  std::vector<MovementSpan> moves;
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    double t = static_cast<double>(schedule[k].first) * 30.0;
    moves.push_back({t - 0.9, t + 0.9});
  }
  for (std::size_t e = 0; e < n_epochs; ++e) {
    if (h[e] != SleepStage::Wake) continue;
    if (move_rng.uniform() < spec.movement_rate_per_wake_epoch) {
      double t = static_cast<double>(e) * 30.0 + move_rng.uniform(2.0, 26.0);
      moves.push_back({t, t + move_rng.uniform(0.8, 2.0)});
    }
  }
  std::sort(moves.begin(), moves.end(),
            [](const MovementSpan& a, const MovementSpan& b) {
              return a.t0_s < b.t0_s;
            });
  s.truth.movements = moves;

  {
    double breath_phase = 0.0;
    std::size_t move_idx = 0;
    for (std::size_t i = 0; i < n_imu; ++i) {
      double t = static_cast<double>(i) / spec.fs_imu;
      std::size_t e =
          std::min(n_epochs - 1, static_cast<std::size_t>(t / 30.0));

      // Piecewise-constant gravity with a short linear blend at changes.
      Vec3 g = posture_gravity(schedule[0].second);
      for (std::size_t k = 0; k < schedule.size(); ++k) {
        double tk = static_cast<double>(schedule[k].first) * 30.0;
        if (t >= tk) {
          Vec3 target = posture_gravity(schedule[k].second);
          double blend = std::clamp((t - tk) / 1.5, 0.0, 1.0);
          if (k > 0 && blend < 1.0) {
            Vec3 prev = posture_gravity(schedule[k - 1].second);
            g = {prev.x + (target.x - prev.x) * blend,
                 prev.y + (target.y - prev.y) * blend,
                 prev.z + (target.z - prev.z) * blend};
          } else {
            g = target;
          }
        }
      }

      breath_phase += 2.0 * M_PI * (rr_epoch[e] / 60.0) / spec.fs_imu;
      double ripple = 0.012 * std::sin(breath_phase);

      double mx = 0.0, my = 0.0, mz = 0.0;
      while (move_idx < moves.size() && t > moves[move_idx].t1_s) ++move_idx;
      if (move_idx < moves.size() && t >= moves[move_idx].t0_s &&
          t <= moves[move_idx].t1_s) {
        mx = imu_rng.uniform(-0.9, 0.9);
        my = imu_rng.uniform(-0.9, 0.9);
        mz = imu_rng.uniform(-0.9, 0.9);
      }

      rec.imu[0][i] = g.x + mx + imu_rng.normal(0.0, 0.004);
      rec.imu[1][i] = g.y + ripple + my + imu_rng.normal(0.0, 0.004);
      rec.imu[2][i] = g.z + mz + imu_rng.normal(0.0, 0.004);
    }
  }

  for (const ArtifactSpan& a : spec.artifacts) {
    inject_artifact(rec, a);
    s.truth.artifacts.push_back(a);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Truth sidecar
// ---------------------------------------------------------------------------

Posture posture_from_name(const std::string& name) {
  for (Posture p : {Posture::Supine, Posture::Prone, Posture::LeftSide,
                    Posture::RightSide, Posture::Upright})
    if (name == posture_name(p)) return p;
  raise(ErrorCode::FormatError, "unknown posture '" + name + "'");
}

std::string truth_to_json(const SessionTruth& t) {
  nlohmann::json j;
  j["schema"] = 1;
  j["seed"] = t.seed;
  std::string stages;
  for (SleepStage s : t.hypnogram.stages) stages.push_back(stage_token(s));
  j["hypnogram"] = stages;
  if (t.sol_epoch)
    j["sol_epoch"] = *t.sol_epoch;
  else
    j["sol_epoch"] = nullptr;
  j["hr_bpm_per_5s"] = t.hr_bpm_per_5s;
  j["rr_brpm_per_60s"] = t.rr_brpm_per_60s;
  nlohmann::json postures = nlohmann::json::array();
  for (const auto& [e, p] : t.posture_changes)
    postures.push_back({{"epoch", e}, {"posture", posture_name(p)}});
  j["posture_changes"] = postures;
  nlohmann::json movements = nlohmann::json::array();
  for (const auto& m : t.movements) movements.push_back({m.t0_s, m.t1_s});
  j["movements"] = movements;
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& a : t.artifacts)
    artifacts.push_back({{"kind", a.kind},
                         {"t0", a.t0_s},
                         {"t1", a.t1_s},
                         {"channels", a.channels},
                         {"magnitude", a.magnitude}});
  j["artifacts"] = artifacts;
  return j.dump(2) + "\n";
}

SessionTruth truth_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    raise(ErrorCode::FormatError, std::string("bad truth JSON: ") + e.what());
  }
  SessionTruth t;
  t.seed = j.value("seed", 0ULL);
  for (char c : j.at("hypnogram").get<std::string>())
    t.hypnogram.stages.push_back(stage_from_token(c));
  if (!j.at("sol_epoch").is_null())
    t.sol_epoch = j.at("sol_epoch").get<std::size_t>();
  t.hr_bpm_per_5s = j.value("hr_bpm_per_5s", std::vector<double>{});
  t.rr_brpm_per_60s = j.value("rr_brpm_per_60s", std::vector<double>{});
  for (const auto& p : j.value("posture_changes", nlohmann::json::array()))
    t.posture_changes.emplace_back(
        p.at("epoch").get<std::size_t>(),
        posture_from_name(p.at("posture").get<std::string>()));
  for (const auto& m : j.value("movements", nlohmann::json::array()))
    t.movements.push_back({m.at(0).get<double>(), m.at(1).get<double>()});
  for (const auto& a : j.value("artifacts", nlohmann::json::array())) {
    ArtifactSpan span;
    span.kind = a.at("kind").get<std::string>();
    span.t0_s = a.at("t0").get<double>();
    span.t1_s = a.at("t1").get<double>();
    span.channels = a.value("channels", std::vector<int>{});
    span.magnitude = a.value("magnitude", 0.0);
    t.artifacts.push_back(span);
  }
  return t;
}

void write_truth(const std::filesystem::path& path, const SessionTruth& t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) raise(ErrorCode::IoError, "cannot write " + path.string());
  out << truth_to_json(t);
}

SessionTruth read_truth(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return truth_from_json(ss.str());
}

}  // namespace hypnos
