#include <doctest.h>

#include <set>

#include "hypnos/errors.hpp"
#include "hypnos/referencing.hpp"
#include "hypnos/rng.hpp"

using namespace hypnos;

namespace {

struct Fixture {
  SessionRecording rec;
  std::vector<EpochView> views;

  explicit Fixture(double fill_step = 1.0) {
    rec.fs_exg = 250.0;
    rec.fs_ppg = 50.0;
    rec.fs_imu = 50.0;
    for (int c = 0; c < kNumExgChannels; ++c) {
      rec.exg[c].resize(7500);
      for (std::size_t i = 0; i < 7500; ++i)
        rec.exg[c][i] = fill_step * (c + 1) + 0.001 * static_cast<double>(i % 7);
    }
    for (auto& ch : rec.ppg) ch.assign(1500, 0.0);
    for (auto& ch : rec.imu) ch.assign(1500, 0.0);
    views = slice_epochs(rec);
  }
};

std::set<std::string> names(const std::vector<Derivation>& ds) {
  std::set<std::string> out;
  for (const auto& d : ds) out.insert(d.name);
  return out;
}

}  // namespace

TEST_CASE("cms scheme passes scorable channels through") {
  Fixture fx;
  ChannelMask mask{true, false, true, true, true, true};
  auto out = apply_scheme(fx.views[0], mask, ReferencingScheme::CmsOnly);
  CHECK(names(out) ==
        std::set<std::string>{"FH_L", "OTE_L", "OTE_R", "BE_L", "BE_R"});
  CHECK(out[0].samples[0] == doctest::Approx(1.0));
}

TEST_CASE("contralateral drops channels whose opposite BE is unscorable") {
  Fixture fx;
  ChannelMask mask{true, true, true, true, true, false};  // BE_R bad
  auto out = apply_scheme(fx.views[0], mask, ReferencingScheme::ContralateralBe);
  // Left-side channels reference BE_R and are dropped; right side keeps BE_L.
  CHECK(names(out) == std::set<std::string>{"FH_R-BE_L", "OTE_R-BE_L"});
}

TEST_CASE("dynamic falls back to CMS when both BE are unscorable") {
  Fixture fx;
  ChannelMask mask{true, true, true, true, false, false};
  auto dyn = apply_scheme(fx.views[0], mask, ReferencingScheme::Dynamic);
  auto cms = apply_scheme(fx.views[0], mask, ReferencingScheme::CmsOnly);
  CHECK(names(dyn) == names(cms));
}

TEST_CASE("dynamic with only BE_L usable re-references the right side") {
  Fixture fx;
  ChannelMask mask{true, true, true, true, true, false};  // BE_R bad
  auto out = apply_scheme(fx.views[0], mask, ReferencingScheme::Dynamic);
  CHECK(names(out) == std::set<std::string>{"FH_L", "OTE_L", "BE_L",
                                            "FH_R-BE_L", "OTE_R-BE_L"});
  for (const auto& d : out) {
    if (d.name == "FH_R-BE_L")
      CHECK(d.samples[0] == doctest::Approx(2.0 - 5.0));
  }
}

TEST_CASE("dynamic with both BE usable re-references both sides") {
  Fixture fx;
  ChannelMask mask{true, true, true, true, true, true};
  auto out = apply_scheme(fx.views[0], mask, ReferencingScheme::Dynamic);
  CHECK(names(out) ==
        std::set<std::string>{"FH_L-BE_R", "OTE_L-BE_R", "BE_L-BE_R",
                              "FH_R-BE_L", "OTE_R-BE_L", "BE_R-BE_L"});
}

TEST_CASE("re-referencing removes a shared component exactly") {
  Fixture fx;
  // s_c = u + n_c with a large shared component u.
  Rng rng(31);
  std::vector<double> shared(7500);
  for (double& v : shared) v = rng.normal(0.0, 80.0);
  std::array<std::vector<double>, 6> noise;
  for (int c = 0; c < 6; ++c) {
    noise[c].resize(7500);
    for (auto& v : noise[c]) v = rng.normal(0.0, 5.0);
    for (std::size_t i = 0; i < 7500; ++i)
      fx.rec.exg[c][i] = shared[i] + noise[c][i];
  }
  auto views = slice_epochs(fx.rec);
  ChannelMask all{true, true, true, true, true, true};
  auto out = apply_scheme(views[0], all, ReferencingScheme::ContralateralBe);
  for (const auto& d : out) {
    int src = static_cast<int>(d.source);
    int ref = static_cast<int>(opposite_be(d.source));
    for (std::size_t i = 0; i < 100; ++i) {
      double expect = noise[src][i] - noise[ref][i];
      CHECK(d.samples[i] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("dynamic derivation set contains the contralateral set") {
  Fixture fx;
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    ChannelMask mask;
    for (int c = 0; c < 6; ++c) mask[c] = rng.uniform() < 0.7;
    auto dyn = names(apply_scheme(fx.views[0], mask, ReferencingScheme::Dynamic));
    auto con =
        names(apply_scheme(fx.views[0], mask, ReferencingScheme::ContralateralBe));
    for (const auto& n : con) CHECK(dyn.count(n) == 1);
  }
}
