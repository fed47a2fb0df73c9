// Command-line surface: simulate / stage / smooth / fit-hmm / vitals /
// evaluate / closed-loop / bandit-sim. Exit codes: 0 success, 2 input error,
// 3 validation error; machine-readable error lines go to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "hypnos/config.hpp"
#include "hypnos/csvio.hpp"
#include "hypnos/errors.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/smoothing.hpp"
#include "hypnos/synth.hpp"

namespace fs = std::filesystem;
using namespace hypnos;

namespace {

constexpr const char* kVersion = "hypnos 0.1.0 (schema 1)";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// --- session spec files (flat key=value, repeatable posture/artifact) ------

SessionSpec parse_session_spec(const std::string& text) {
  SessionSpec spec;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    auto a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    auto b = line.find_last_not_of(" \t");
    line = line.substr(a, b - a + 1);
    auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::FormatError,
            "spec line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);

    auto num = [&](const std::string& v) -> double {
      try {
        return std::stod(v);
      } catch (const std::exception&) {
        raise(ErrorCode::FormatError, "bad number in spec key " + key);
      }
    };
    auto split = [](const std::string& v) {
      std::vector<std::string> out;
      std::istringstream ss(v);
      std::string cell;
      while (std::getline(ss, cell, ',')) out.push_back(cell);
      return out;
    };

    if (key == "seed") spec.seed = static_cast<std::uint64_t>(num(value));
    else if (key == "n_epochs") spec.n_epochs = static_cast<std::size_t>(num(value));
    else if (key == "sol_epoch") spec.sol_epoch = static_cast<std::size_t>(num(value));
    else if (key == "light_frac") spec.light_frac = num(value);
    else if (key == "deep_frac") spec.deep_frac = num(value);
    else if (key == "rem_frac") spec.rem_frac = num(value);
    else if (key == "fs_exg") spec.fs_exg = num(value);
    else if (key == "fs_ppg") spec.fs_ppg = num(value);
    else if (key == "fs_imu") spec.fs_imu = num(value);
    else if (key == "hr_bpm") spec.hr_const_bpm = num(value);
    else if (key == "rr_brpm") spec.rr_const_brpm = num(value);
    else if (key == "stage_modulated_vitals") spec.stage_modulated_vitals = num(value) != 0.0;
    else if (key == "movement_rate") spec.movement_rate_per_wake_epoch = num(value);
    else if (key == "posture") {
      auto parts = split(value);
      if (parts.size() != 2)
        raise(ErrorCode::FormatError, "posture=epoch,name");
      spec.posture_schedule.emplace_back(
          static_cast<std::size_t>(num(parts[0])), posture_from_name(parts[1]));
    } else if (key == "artifact") {
      // artifact=kind,t0,t1[,channels|all[,magnitude]]
      auto parts = split(value);
      if (parts.size() < 3)
        raise(ErrorCode::FormatError, "artifact=kind,t0,t1[,channels[,magnitude]]");
      ArtifactSpan span;
      span.kind = parts[0];
      span.t0_s = num(parts[1]);
      span.t1_s = num(parts[2]);
      if (parts.size() >= 4 && parts[3] != "all") {
        std::istringstream cs(parts[3]);
        std::string name;
        while (std::getline(cs, name, ';'))
          span.channels.push_back(static_cast<int>(exg_channel_from_name(name)));
      }
      if (parts.size() >= 5) span.magnitude = num(parts[4]);
      spec.artifacts.push_back(span);
    } else {
      raise(ErrorCode::FormatError, "unknown spec key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

Config load_config_or_default(const std::string& path) {
  return path.empty() ? Config{} : Config::load(path);
}

struct LoadedScorers {
  std::optional<PmlWeights> pml;
  std::optional<SmlWeights> sml;
};

LoadedScorers load_scorers(const Config& cfg) {
  LoadedScorers out;
  ScorerSpec s = parse_scorer_spec(cfg.scorer);
  if (s.kind == ScorerKind::Pml) out.pml = PmlWeights::load(s.weights_path);
  SmlScorerSpec m = parse_sml_scorer_spec(cfg.sml_scorer);
  if (m.kind == SmlScorerKind::Net) out.sml = SmlWeights::load(m.weights_path);
  return out;
}

// --- subcommand bodies ------------------------------------------------------

int cmd_simulate(const std::string& spec_path, const std::string& out_dir) {
  SessionSpec spec = parse_session_spec(slurp(spec_path));
  SyntheticSession session = generate_session(spec);
  fs::create_directories(out_dir);
  write_recording(out_dir, session.recording);
  write_truth(fs::path(out_dir) / "truth.json", session.truth);
  write_hypnogram(fs::path(out_dir) / "truth.hyp", session.truth.hypnogram);
  std::cout << "simulated " << session.truth.hypnogram.size() << " epochs into "
            << out_dir << "\n";
  return 0;
}

int cmd_stage(const std::string& dir, const std::string& config_path,
              const std::string& scheme, const std::string& scorer,
              const std::string& sml_scorer, const std::string& out_path) {
  Config cfg = load_config_or_default(config_path);
  if (!scheme.empty()) cfg.ref_scheme = scheme;
  if (!scorer.empty()) cfg.scorer = scorer;
  if (!sml_scorer.empty()) cfg.sml_scorer = sml_scorer;
  cfg.validate();

  SessionRecording rec = load_recording(dir, cfg.fs_exg, cfg.fs_ppg, cfg.fs_imu);
  LoadedScorers scorers = load_scorers(cfg);
  StagedSession staged =
      stage_session(rec, cfg.pipeline_config(), scorers.pml, scorers.sml);
  write_hypnogram(out_path, staged.hypnogram);
  write_provenance_csv(out_path + ".prov.csv", staged.decisions);
  std::size_t unscored = staged.hypnogram.count(SleepStage::Unscored);
  std::cout << "staged " << staged.hypnogram.size() << " epochs ("
            << unscored << " unscored) -> " << out_path << "\n";
  return 0;
}

int cmd_smooth(const std::string& params_path, const std::string& in_path,
               const std::string& out_path) {
  HmmParams params = read_hmm_params(params_path);
  Hypnogram h = read_hypnogram(in_path);
  Hypnogram out = smooth(h, params);
  write_hypnogram(out_path, out);
  std::cout << "smoothed " << out.size() << " epochs -> " << out_path << "\n";
  return 0;
}

int cmd_fit_hmm(const std::vector<std::string>& truths,
                const std::vector<std::string>& observed,
                const std::string& out_path) {
  if (truths.empty() || truths.size() != observed.size())
    raise(ErrorCode::ConfigError,
          "--truth and --observed must be paired and non-empty");
  std::vector<std::pair<Hypnogram, Hypnogram>> corpus;
  for (std::size_t i = 0; i < truths.size(); ++i)
    corpus.emplace_back(read_hypnogram(truths[i]), read_hypnogram(observed[i]));
  HmmParams params = estimate_hmm(corpus);
  write_hmm_params(out_path, params);
  std::cout << "fitted hmm params from " << corpus.size() << " sessions -> "
            << out_path << "\n";
  return 0;
}

int cmd_vitals(const std::string& dir, const std::string& config_path,
               const std::string& out_path) {
  Config cfg = load_config_or_default(config_path);
  SessionRecording rec = load_recording(dir, cfg.fs_exg, cfg.fs_ppg, cfg.fs_imu);
  PipelineConfig pc = cfg.pipeline_config();
  VitalsEngine engine(pc);
  std::vector<VitalsRow> rows;
  std::optional<double> last_rr;
  std::optional<Posture> last_posture;
  for (const EpochView& e : slice_epochs(rec)) {
    auto v = engine.process(e);
    if (v.rr) last_rr = v.rr->brpm;
    for (std::size_t w = 0; w < v.hr.size(); ++w) {
      if (w / 2 < v.posture.size()) last_posture = v.posture[w / 2];
      VitalsRow row;
      row.t_start = v.hr[w].window_start;
      row.hr_quality = v.hr[w].quality;
      if (v.hr[w].quality) row.hr_bpm = v.hr[w].bpm;
      row.rr_brpm = last_rr;
      row.posture = last_posture;
      rows.push_back(row);
    }
  }
  write_vitals_csv(out_path, rows);
  std::cout << "vitals: " << rows.size() << " windows -> " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& pred_path,
                 const std::vector<std::string>& truth_paths, double tib_min,
                 const std::string& out_path) {
  Hypnogram pred = read_hypnogram(pred_path);
  Hypnogram truth;
  if (truth_paths.size() == 1) {
    truth = read_hypnogram(truth_paths[0]);
  } else {
    std::vector<Hypnogram> raters;
    for (const auto& p : truth_paths) raters.push_back(read_hypnogram(p));
    truth = consensus_hypnogram(raters);
  }

  ConfusionMatrix cm = confusion(pred, truth);
  Metrics m = metrics(cm);
  double kappa = cohens_kappa(cm);
  double tib = tib_min > 0.0 ? tib_min : pred.duration_min();
  SleepMacros pred_macros = sleep_macros(pred, tib);
  SleepMacros truth_macros = sleep_macros(truth, tib);

  std::ostringstream report;
  report.precision(6);
  report << "# schema " << kSchemaVersion << "\n";
  report << "metric,value\n";
  report << "epochs," << pred.size() << "\n";
  report << "accuracy," << m.accuracy << "\n";
  report << "kappa," << kappa << "\n";
  const char* names[4] = {"wake", "light", "deep", "rem"};
  for (int s = 0; s < 4; ++s) {
    report << "precision_" << names[s] << "," << m.per_class[s].precision << "\n";
    report << "recall_" << names[s] << "," << m.per_class[s].recall << "\n";
    report << "f1_" << names[s] << "," << m.per_class[s].f1 << "\n";
  }
  report << "macro_f1_all," << m.macro_f1_all << "\n";
  report << "macro_f1_present," << m.macro_f1_present << "\n";
  report << "unscored_pred," << cm.unscored_pred << "\n";
  report << "unscored_truth," << cm.unscored_truth << "\n";
  report << "pred_tst_min," << pred_macros.tst_min << "\n";
  report << "pred_sol_min," << pred_macros.sol_min << "\n";
  report << "pred_se_percent," << pred_macros.se_percent << "\n";
  report << "truth_tst_min," << truth_macros.tst_min << "\n";
  report << "truth_sol_min," << truth_macros.sol_min << "\n";

  if (!out_path.empty()) {
    std::ofstream out(out_path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write " + out_path);
    out << report.str();
  }
  std::printf("accuracy %.4f  kappa %.4f  (%zu epochs, %llu unscored pred)\n",
              m.accuracy, kappa, pred.size(),
              static_cast<unsigned long long>(cm.unscored_pred));
  for (int s = 0; s < 4; ++s)
    std::printf("  %-5s P %.4f R %.4f F1 %.4f\n", names[s],
                m.per_class[s].precision, m.per_class[s].recall,
                m.per_class[s].f1);
  return 0;
}

int cmd_closed_loop(const std::string& dir, const std::string& config_path,
                    const std::string& out_path, const std::string& poas_path,
                    const std::string& bandit_path) {
  Config cfg = load_config_or_default(config_path);
  SessionRecording rec = load_recording(dir, cfg.fs_exg, cfg.fs_ppg, cfg.fs_imu);
  ClosedLoopConfig cc = cfg.closed_loop_config();

  std::vector<ArmPosterior> posteriors;
  if (!bandit_path.empty() && fs::exists(bandit_path))
    posteriors = posteriors_from_text(slurp(bandit_path));

  ClosedLoopResult res = run_closed_loop(rec, cc, std::move(posteriors));
  write_actions_csv(out_path, res.actions);
  std::string poas_out = poas_path.empty() ? out_path + ".poas.csv" : poas_path;
  write_poas_csv(poas_out, res.poas_trace);
  if (!bandit_path.empty()) {
    std::ofstream out(bandit_path, std::ios::binary);
    if (!out) raise(ErrorCode::IoError, "cannot write " + bandit_path);
    out << posteriors_to_text(res.posteriors);
  }
  if (res.sol_epoch)
    std::cout << "sol detected at epoch " << *res.sol_epoch << "; ";
  std::cout << "stopped at t=" << res.stop_t << " s; " << res.actions.size()
            << " actions -> " << out_path << "\n";
  return 0;
}

int cmd_bandit_sim(int contents, int sessions, std::uint64_t seed,
                   const std::string& means_csv, double obs_var,
                   double prior_mu, double prior_sigma2,
                   const std::string& out_path) {
  if (contents < 2) raise(ErrorCode::TooFewContents, "need >= 2 contents");
  std::vector<double> means;
  {
    std::istringstream ss(means_csv);
    std::string cell;
    while (std::getline(ss, cell, ',')) means.push_back(std::stod(cell));
  }
  if (static_cast<int>(means.size()) != contents)
    raise(ErrorCode::ConfigError, "--means must list one value per content");

  std::vector<ArmPosterior> posteriors(
      static_cast<std::size_t>(contents), ArmPosterior{prior_mu, prior_sigma2, 0});
  std::vector<int> selections(static_cast<std::size_t>(contents), 0);
  std::vector<int> last_block(static_cast<std::size_t>(contents), 0);
  Rng rng(seed);

  for (int s = 0; s < sessions; ++s) {
    // Session-start selection: nothing is currently playing, no exclusion.
    int arm = acr_select(posteriors, rng);
    double reward = means[static_cast<std::size_t>(arm)] +
                    std::sqrt(obs_var) * rng.normal();
    posteriors[static_cast<std::size_t>(arm)] =
        acr_update(posteriors[static_cast<std::size_t>(arm)], reward, obs_var);
    ++selections[static_cast<std::size_t>(arm)];
    if (s >= sessions - 100) ++last_block[static_cast<std::size_t>(arm)];
  }

  std::ostringstream out;
  out.precision(8);
  out << "# schema " << kSchemaVersion << "\n";
  out << "content_id,selections,frequency,last100_frequency,mu,sigma2,n\n";
  for (int c = 0; c < contents; ++c) {
    out << c << "," << selections[c] << ","
        << static_cast<double>(selections[c]) / sessions << ","
        << last_block[c] / 100.0 << "," << posteriors[c].mu << ","
        << posteriors[c].sigma2 << "," << posteriors[c].n << "\n";
  }
  if (!out_path.empty()) {
    std::ofstream f(out_path, std::ios::binary);
    if (!f) raise(ErrorCode::IoError, "cannot write " + out_path);
    f << out.str();
  }
  std::cout << out.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sleep staging, smoothing and closed-loop stimulation toolkit"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "generate a synthetic session");
  std::string sim_spec, sim_out;
  sim->add_option("spec", sim_spec, "session spec file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();

  auto* stage = app.add_subcommand("stage", "run the real-time scoring pipeline");
  std::string stage_dir, stage_cfg, stage_scheme, stage_scorer, stage_sml,
      stage_out;
  stage->add_option("dir", stage_dir, "recording directory")->required();
  stage->add_option("--config", stage_cfg, "config file");
  stage->add_option("--ref-scheme", stage_scheme, "dynamic|contralateral|cms");
  stage->add_option("--scorer", stage_scorer, "baseline|pml:<weights>");
  stage->add_option("--sml-scorer", stage_sml, "baseline|net:<weights>");
  stage->add_option("--out", stage_out, "output hypnogram")->required();

  auto* smooth_cmd = app.add_subcommand("smooth", "offline two-pass completion");
  std::string smooth_params, smooth_in, smooth_out;
  smooth_cmd->add_option("--params", smooth_params, "hmm params file")->required();
  smooth_cmd->add_option("--in", smooth_in, "input hypnogram")->required();
  smooth_cmd->add_option("--out", smooth_out, "output hypnogram")->required();

  auto* fit = app.add_subcommand("fit-hmm", "estimate smoothing parameters");
  std::vector<std::string> fit_truth, fit_obs;
  std::string fit_out;
  fit->add_option("--truth", fit_truth, "truth hypnogram (repeatable)");
  fit->add_option("--observed", fit_obs, "observed hypnogram (repeatable)");
  fit->add_option("--out", fit_out, "output params file")->required();

  auto* vit = app.add_subcommand("vitals", "heart rate, breathing and posture");
  std::string vit_dir, vit_cfg, vit_out;
  vit->add_option("dir", vit_dir, "recording directory")->required();
  vit->add_option("--config", vit_cfg, "config file");
  vit->add_option("--out", vit_out, "output csv")->required();

  auto* eval = app.add_subcommand("evaluate", "agreement metrics");
  std::string eval_pred, eval_out;
  std::vector<std::string> eval_truths;
  double eval_tib = 0.0;
  eval->add_option("--pred", eval_pred, "predicted hypnogram")->required();
  eval->add_option("--truth", eval_truths, "truth hypnogram")->required();
  eval->add_option("--truth2", eval_truths, "second rater (consensus)");
  eval->add_option("--truth3", eval_truths, "third rater (consensus)");
  eval->add_option("--tib", eval_tib, "time in bed, minutes");
  eval->add_option("--out", eval_out, "report csv");

  auto* loop = app.add_subcommand("closed-loop", "stimulation controller run");
  std::string loop_dir, loop_cfg, loop_out, loop_poas, loop_bandit;
  loop->add_option("dir", loop_dir, "recording directory")->required();
  loop->add_option("--config", loop_cfg, "config file");
  loop->add_option("--out", loop_out, "action log csv")->required();
  loop->add_option("--poas", loop_poas, "PoAs trace csv");
  loop->add_option("--bandit-state", loop_bandit, "posterior store to update");

  auto* bandit = app.add_subcommand("bandit-sim", "content recommender study");
  int b_contents = 3, b_sessions = 500;
  std::uint64_t b_seed = 1;
  std::string b_means = "2.0,0.5,0.5", b_out;
  double b_obs = 1.0, b_mu0 = 0.0, b_sigma0 = 100.0;
  bandit->add_option("--contents", b_contents, "number of contents");
  bandit->add_option("--sessions", b_sessions, "number of sessions");
  bandit->add_option("--seed", b_seed, "rng seed");
  bandit->add_option("--means", b_means, "true mean reward per content");
  bandit->add_option("--obs-var", b_obs, "observation variance");
  bandit->add_option("--prior-mu", b_mu0, "prior mean");
  bandit->add_option("--prior-sigma2", b_sigma0, "prior variance");
  bandit->add_option("--out", b_out, "selection table csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    std::fprintf(stderr, "error code=BadArguments msg=\"%s\"\n", e.what());
    return 2;
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_spec, sim_out);
    if (stage->parsed())
      return cmd_stage(stage_dir, stage_cfg, stage_scheme, stage_scorer,
                       stage_sml, stage_out);
    if (smooth_cmd->parsed())
      return cmd_smooth(smooth_params, smooth_in, smooth_out);
    if (fit->parsed()) return cmd_fit_hmm(fit_truth, fit_obs, fit_out);
    if (vit->parsed()) return cmd_vitals(vit_dir, vit_cfg, vit_out);
    if (eval->parsed())
      return cmd_evaluate(eval_pred, eval_truths, eval_tib, eval_out);
    if (loop->parsed())
      return cmd_closed_loop(loop_dir, loop_cfg, loop_out, loop_poas,
                             loop_bandit);
    if (bandit->parsed())
      return cmd_bandit_sim(b_contents, b_sessions, b_seed, b_means, b_obs,
                            b_mu0, b_sigma0, b_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error code=%s msg=\"%s\"\n",
                 error_code_name(e.code()), e.what());
    return is_input_error(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error code=Internal msg=\"%s\"\n", e.what());
    return 3;
  }
  return 0;
}
