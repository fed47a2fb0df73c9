#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hypnos/pipeline.hpp"

namespace hypnos {

// Flat key=value configuration. Unknown keys are rejected; environment
// variables are never consulted.
struct Config {
  double fs_exg = 250.0;
  double fs_ppg = 50.0;
  double fs_imu = 50.0;

  std::string ref_scheme = "dynamic";
  std::string scorer = "baseline";      // baseline | pml:<weights-path>
  std::string sml_scorer = "baseline";  // baseline | net:<weights-path>
  std::string quality_tree_path;
  std::string smoothing_params_path;

  double notch_q = 30.0;

  double poas_alpha = 0.2;
  double acs_theta = 0.5;          // percent/min
  double acs_window_min = 20.0;
  double acs_min_gap_s = 300.0;
  double acs_slope_window_s = 300.0;

  double t1_s = 300.0;
  double t2_s = 720.0;
  double fade_s = 30.0;
  double hard_stop_s = 3000.0;
  int sol_run_len = 2;

  double bandit_mu0 = 0.0;
  double bandit_sigma0sq = 100.0;
  double bandit_obs_var = 1.0;
  int contents = 3;

  std::uint64_t seed = 1;

  void validate() const;  // throws ConfigError

  static Config from_text(const std::string& text);
  static Config load(const std::filesystem::path& path);
  std::string to_text() const;

  // Assemblers for the composed runtime configs. Weight files referenced by
  // scorer specs are loaded by the caller (see parse_scorer_spec).
  PipelineConfig pipeline_config() const;
  ClosedLoopConfig closed_loop_config() const;
};

struct ScorerSpec {
  ScorerKind kind = ScorerKind::Baseline;
  std::string weights_path;
};

struct SmlScorerSpec {
  SmlScorerKind kind = SmlScorerKind::Baseline;
  std::string weights_path;
};

ScorerSpec parse_scorer_spec(const std::string& spec);
SmlScorerSpec parse_sml_scorer_spec(const std::string& spec);

}  // namespace hypnos
