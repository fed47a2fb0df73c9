#include "hypnos/config.hpp"

#include <fstream>
#include <sstream>

#include "hypnos/errors.hpp"

namespace hypnos {

void Config::validate() const {
  if (!(fs_exg > 64.0) || !(fs_ppg > 0.0) || !(fs_imu > 0.0))
    raise(ErrorCode::ConfigError, "sampling rates out of range");
  scheme_from_string(ref_scheme);
  parse_scorer_spec(scorer);
  parse_sml_scorer_spec(sml_scorer);
  if (!(notch_q > 0.0)) raise(ErrorCode::ConfigError, "notch_q must be > 0");
  if (!(poas_alpha > 0.0) || poas_alpha > 1.0)
    raise(ErrorCode::ConfigError, "poas_alpha must be in (0, 1]");
  if (sol_run_len < 1) raise(ErrorCode::ConfigError, "sol_run_len must be >= 1");
  if (!(bandit_sigma0sq > 0.0) || !(bandit_obs_var > 0.0))
    raise(ErrorCode::ConfigError, "bandit variances must be positive");
  if (contents < 2) raise(ErrorCode::ConfigError, "contents must be >= 2");
  StimTimeline tl{t1_s, t2_s, fade_s, hard_stop_s};
  tl.validate();
}

namespace {

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    raise(ErrorCode::ConfigError, "bad numeric value for " + key);
  }
}

int to_int(const std::string& key, const std::string& value) {
  return static_cast<int>(to_double(key, value));
}

}  // namespace

Config Config::from_text(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::size_t a = line.find_first_not_of(" \t");
    if (a == std::string::npos) continue;
    std::size_t b = line.find_last_not_of(" \t");
    line = line.substr(a, b - a + 1);
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      raise(ErrorCode::ConfigError,
            "config line " + std::to_string(line_no) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    while (!value.empty() && value.front() == ' ') value.erase(value.begin());

    if (key == "fs_exg") c.fs_exg = to_double(key, value);
    else if (key == "fs_ppg") c.fs_ppg = to_double(key, value);
    else if (key == "fs_imu") c.fs_imu = to_double(key, value);
    else if (key == "ref_scheme") c.ref_scheme = value;
    else if (key == "scorer") c.scorer = value;
    else if (key == "sml_scorer") c.sml_scorer = value;
    else if (key == "quality_tree") c.quality_tree_path = value;
    else if (key == "smoothing_params") c.smoothing_params_path = value;
    else if (key == "notch_q") c.notch_q = to_double(key, value);
    else if (key == "poas_alpha") c.poas_alpha = to_double(key, value);
    else if (key == "acs_theta") c.acs_theta = to_double(key, value);
    else if (key == "acs_window_min") c.acs_window_min = to_double(key, value);
    else if (key == "acs_min_gap_s") c.acs_min_gap_s = to_double(key, value);
    else if (key == "acs_slope_window_s") c.acs_slope_window_s = to_double(key, value);
    else if (key == "t1_s") c.t1_s = to_double(key, value);
    else if (key == "t2_s") c.t2_s = to_double(key, value);
    else if (key == "fade_s") c.fade_s = to_double(key, value);
    else if (key == "hard_stop_s") c.hard_stop_s = to_double(key, value);
    else if (key == "sol_run_len") c.sol_run_len = to_int(key, value);
    else if (key == "bandit_mu0") c.bandit_mu0 = to_double(key, value);
    else if (key == "bandit_sigma0sq") c.bandit_sigma0sq = to_double(key, value);
    else if (key == "bandit_obs_var") c.bandit_obs_var = to_double(key, value);
    else if (key == "contents") c.contents = to_int(key, value);
    else if (key == "seed") c.seed = static_cast<std::uint64_t>(to_double(key, value));
    else
      raise(ErrorCode::ConfigError, "unknown config key '" + key + "'");
  }
  c.validate();
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::IoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return from_text(ss.str());
}

std::string Config::to_text() const {
  std::ostringstream out;
  out << "fs_exg=" << fs_exg << "\n";
  out << "fs_ppg=" << fs_ppg << "\n";
  out << "fs_imu=" << fs_imu << "\n";
  out << "ref_scheme=" << ref_scheme << "\n";
  out << "scorer=" << scorer << "\n";
  out << "sml_scorer=" << sml_scorer << "\n";
  if (!quality_tree_path.empty()) out << "quality_tree=" << quality_tree_path << "\n";
  if (!smoothing_params_path.empty())
    out << "smoothing_params=" << smoothing_params_path << "\n";
  out << "notch_q=" << notch_q << "\n";
  out << "poas_alpha=" << poas_alpha << "\n";
  out << "acs_theta=" << acs_theta << "\n";
  out << "acs_window_min=" << acs_window_min << "\n";
  out << "acs_min_gap_s=" << acs_min_gap_s << "\n";
  out << "acs_slope_window_s=" << acs_slope_window_s << "\n";
  out << "t1_s=" << t1_s << "\n";
  out << "t2_s=" << t2_s << "\n";
  out << "fade_s=" << fade_s << "\n";
  out << "hard_stop_s=" << hard_stop_s << "\n";
  out << "sol_run_len=" << sol_run_len << "\n";
  out << "bandit_mu0=" << bandit_mu0 << "\n";
  out << "bandit_sigma0sq=" << bandit_sigma0sq << "\n";
  out << "bandit_obs_var=" << bandit_obs_var << "\n";
  out << "contents=" << contents << "\n";
  out << "seed=" << seed << "\n";
  return out.str();
}

PipelineConfig Config::pipeline_config() const {
  validate();
  PipelineConfig pc;
  pc.scheme = scheme_from_string(ref_scheme);
  pc.scorer = parse_scorer_spec(scorer).kind;
  pc.sml_scorer = parse_sml_scorer_spec(sml_scorer).kind;
  pc.preprocess.notch_q = notch_q;
  if (!quality_tree_path.empty())
    pc.quality_tree = read_quality_tree(quality_tree_path);
  return pc;
}

ClosedLoopConfig Config::closed_loop_config() const {
  ClosedLoopConfig cc;
  cc.pipeline = pipeline_config();
  cc.timeline = StimTimeline{t1_s, t2_s, fade_s, hard_stop_s};
  cc.acs.window_min = acs_window_min;
  cc.acs.slope_threshold = acs_theta;
  cc.acs.slope_window_s = acs_slope_window_s;
  cc.acs.min_gap_s = acs_min_gap_s;
  cc.poas_alpha = poas_alpha;
  cc.sol_run_len = sol_run_len;
  cc.n_contents = contents;
  cc.prior_mu = bandit_mu0;
  cc.prior_sigma2 = bandit_sigma0sq;
  cc.obs_variance = bandit_obs_var;
  cc.seed = seed;
  return cc;
}

ScorerSpec parse_scorer_spec(const std::string& spec) {
  ScorerSpec s;
  if (spec == "baseline") {
    s.kind = ScorerKind::Baseline;
    return s;
  }
  if (spec.rfind("pml:", 0) == 0) {
    s.kind = ScorerKind::Pml;
    s.weights_path = spec.substr(4);
    if (s.weights_path.empty())
      raise(ErrorCode::ConfigError, "scorer pml: needs a weights path");
    return s;
  }
  raise(ErrorCode::ConfigError, "scorer must be baseline or pml:<path>");
}

SmlScorerSpec parse_sml_scorer_spec(const std::string& spec) {
  SmlScorerSpec s;
  if (spec == "baseline") {
    s.kind = SmlScorerKind::Baseline;
    return s;
  }
  if (spec.rfind("net:", 0) == 0) {
    s.kind = SmlScorerKind::Net;
    s.weights_path = spec.substr(4);
    if (s.weights_path.empty())
      raise(ErrorCode::ConfigError, "sml_scorer net: needs a weights path");
    return s;
  }
  raise(ErrorCode::ConfigError, "sml_scorer must be baseline or net:<path>");
}

}  // namespace hypnos
