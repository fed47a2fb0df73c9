// Python bindings for the main operations: synthetic sessions, staging,
// smoothing, agreement metrics and the content recommender.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "hypnos/config.hpp"
#include "hypnos/csvio.hpp"
#include "hypnos/errors.hpp"
#include "hypnos/metrics.hpp"
#include "hypnos/pipeline.hpp"
#include "hypnos/smoothing.hpp"
#include "hypnos/synth.hpp"

namespace py = pybind11;
using namespace hypnos;

namespace {

std::string tokens_of(const Hypnogram& h) {
  std::string out;
  for (SleepStage s : h.stages) out.push_back(stage_token(s));
  return out;
}

Hypnogram hyp_of(const std::string& tokens) {
  Hypnogram h;
  for (char c : tokens) h.stages.push_back(stage_from_token(c));
  return h;
}

}  // namespace

PYBIND11_MODULE(_hypnos, m) {
  m.doc() = "sleep staging, smoothing and closed-loop stimulation toolkit";
  m.attr("__version__") = "0.1.0";
  m.attr("SCHEMA_VERSION") = kSchemaVersion;

  py::register_exception<Error>(m, "HypnosError");

  py::class_<SyntheticSession>(m, "SyntheticSession")
      .def_property_readonly(
          "hypnogram",
          [](const SyntheticSession& s) { return tokens_of(s.truth.hypnogram); })
      .def_property_readonly(
          "sol_epoch",
          [](const SyntheticSession& s) { return s.truth.sol_epoch; })
      .def_property_readonly(
          "hr_bpm_per_5s",
          [](const SyntheticSession& s) { return s.truth.hr_bpm_per_5s; })
      .def_property_readonly(
          "rr_brpm_per_60s",
          [](const SyntheticSession& s) { return s.truth.rr_brpm_per_60s; })
      .def("write",
           [](const SyntheticSession& s, const std::string& dir) {
             write_recording(dir, s.recording);
             write_truth(std::filesystem::path(dir) / "truth.json", s.truth);
           },
           py::arg("dir"));

  m.def(
      "generate_session",
      [](std::uint64_t seed, std::size_t n_epochs, std::size_t sol_epoch,
         std::optional<double> hr_bpm, std::optional<double> rr_brpm) {
        SessionSpec spec;
        spec.seed = seed;
        spec.n_epochs = n_epochs;
        spec.sol_epoch = sol_epoch;
        spec.hr_const_bpm = hr_bpm;
        spec.rr_const_brpm = rr_brpm;
        return generate_session(spec);
      },
      py::arg("seed") = 1, py::arg("n_epochs") = 960, py::arg("sol_epoch") = 40,
      py::arg("hr_bpm") = std::nullopt, py::arg("rr_brpm") = std::nullopt,
      "Deterministic synthetic session with ground-truth sidecar");

  m.def(
      "stage",
      [](const SyntheticSession& session, const std::string& scheme,
         const std::string& scorer) {
        Config cfg;
        cfg.ref_scheme = scheme;
        cfg.scorer = scorer;
        cfg.fs_exg = session.recording.fs_exg;
        cfg.fs_ppg = session.recording.fs_ppg;
        cfg.fs_imu = session.recording.fs_imu;
        StagedSession staged =
            stage_session(session.recording, cfg.pipeline_config());
        py::dict out;
        out["hypnogram"] = tokens_of(staged.hypnogram);
        std::vector<std::string> sources;
        for (const auto& d : staged.decisions)
          sources.emplace_back(source_name(d.source));
        out["sources"] = sources;
        return out;
      },
      py::arg("session"), py::arg("scheme") = "dynamic",
      py::arg("scorer") = "baseline",
      "Run the real-time pipeline over a synthetic session");

  m.def(
      "estimate_hmm",
      [](const std::vector<std::pair<std::string, std::string>>& corpus) {
        std::vector<std::pair<Hypnogram, Hypnogram>> pairs;
        for (const auto& [t, o] : corpus)
          pairs.emplace_back(hyp_of(t), hyp_of(o));
        return estimate_hmm(pairs).to_text();
      },
      py::arg("corpus"),
      "Fit transition/emission/initial tables from (truth, observed) pairs");

  m.def(
      "smooth",
      [](const std::string& observed, const std::string& params_text) {
        return tokens_of(smooth(hyp_of(observed), HmmParams::from_text(params_text)));
      },
      py::arg("observed"), py::arg("params"));

  m.def(
      "viterbi",
      [](const std::string& observed, const std::string& params_text) {
        return tokens_of(viterbi(hyp_of(observed), HmmParams::from_text(params_text)));
      },
      py::arg("observed"), py::arg("params"));

  m.def(
      "accuracy",
      [](const std::string& pred, const std::string& truth) {
        return metrics(confusion(hyp_of(pred), hyp_of(truth))).accuracy;
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "cohens_kappa",
      [](const std::string& pred, const std::string& truth) {
        return cohens_kappa(confusion(hyp_of(pred), hyp_of(truth)));
      },
      py::arg("pred"), py::arg("truth"));

  m.def(
      "sleep_macros",
      [](const std::string& tokens, double tib_min) {
        SleepMacros mm = sleep_macros(hyp_of(tokens), tib_min);
        py::dict out;
        out["tib_min"] = mm.tib_min;
        out["sol_min"] = mm.sol_min;
        out["sol_defaulted"] = mm.sol_defaulted;
        out["tst_min"] = mm.tst_min;
        out["se_percent"] = mm.se_percent;
        out["light_min"] = mm.light_min;
        out["deep_min"] = mm.deep_min;
        out["rem_min"] = mm.rem_min;
        return out;
      },
      py::arg("hypnogram"), py::arg("tib_min"));

  m.def(
      "sol_epoch",
      [](const std::string& tokens, int run_len) {
        return sol_from_hypnogram(hyp_of(tokens), run_len);
      },
      py::arg("hypnogram"), py::arg("run_len") = 2);

  m.def(
      "acr_update",
      [](double mu, double sigma2, int n, double reward, double obs_var) {
        ArmPosterior post = acr_update(ArmPosterior{mu, sigma2, n}, reward, obs_var);
        return py::make_tuple(post.mu, post.sigma2, post.n);
      },
      py::arg("mu"), py::arg("sigma2"), py::arg("n"), py::arg("reward"),
      py::arg("obs_var") = 1.0);

  m.def(
      "bandit_sim",
      [](int contents, int sessions, std::uint64_t seed,
         const std::vector<double>& means, double obs_var) {
        if (static_cast<int>(means.size()) != contents)
          raise(ErrorCode::ConfigError, "means must list one value per content");
        std::vector<ArmPosterior> posteriors(
            static_cast<std::size_t>(contents), ArmPosterior{0.0, 100.0, 0});
        std::vector<int> selections(static_cast<std::size_t>(contents), 0);
        std::vector<int> last_block(static_cast<std::size_t>(contents), 0);
        Rng rng(seed);
        for (int s = 0; s < sessions; ++s) {
          int arm = acr_select(posteriors, rng);
          double reward = means[static_cast<std::size_t>(arm)] +
                          std::sqrt(obs_var) * rng.normal();
          posteriors[static_cast<std::size_t>(arm)] = acr_update(
              posteriors[static_cast<std::size_t>(arm)], reward, obs_var);
          ++selections[static_cast<std::size_t>(arm)];
          if (s >= sessions - 100) ++last_block[static_cast<std::size_t>(arm)];
        }
        py::dict out;
        std::vector<double> freq, last;
        for (int c = 0; c < contents; ++c) {
          freq.push_back(static_cast<double>(selections[c]) / sessions);
          last.push_back(last_block[c] / 100.0);
        }
        out["frequency"] = freq;
        out["last100_frequency"] = last;
        return out;
      },
      py::arg("contents") = 3, py::arg("sessions") = 500, py::arg("seed") = 1,
      py::arg("means") = std::vector<double>{2.0, 0.5, 0.5},
      py::arg("obs_var") = 1.0);
}
