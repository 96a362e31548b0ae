#include "fixtures.hpp"

#include "optoretro/config_io.hpp"
#include "optoretro/model.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace optoretro;

namespace {

nlohmann::json base_doc() {
  return nlohmann::json::parse(R"({
    "cavity": {"kappa_hz": 5e6, "nbar": 1e4, "epsilon": 0.8},
    "oscillators": [{"omega_hz": 125e3, "gamma_hz": 2e3, "g_hz": 1e3, "nu": 1},
                    {"omega_hz": -135e3, "gamma_hz": 2e3, "cooperativity": 5.3, "nu": 1}],
    "grid": {"fs_hz": 5e6, "tf_s": 1e-3}
  })");
}

}  // namespace

TEST(Model, ShotNoisePsdMatchesDefinition) {
  const auto cav = fixtures::cavity(0.5);
  EXPECT_DOUBLE_EQ(shot_noise_psd(cav), cav.kappa / (8.0 * 0.5 * cav.nbar));
}

TEST(Model, CooperativityRoundTrip) {
  const auto cav = fixtures::cavity();
  auto osc = fixtures::oscillator(125e3, 2e3, 1.0);
  for (double c : {0.1, 1.0, 5.3, 50.0}) {
    osc.g = coupling_for_cooperativity(c, osc, cav);
    EXPECT_NEAR(cooperativity(osc, cav), c, 1e-12 * c);
  }
}

TEST(Model, SidebandCorrectionLimits) {
  auto cav = fixtures::cavity();
  auto osc = fixtures::oscillator(125e3, 2e3, 0.0);
  const auto sb = sideband_correction(osc, cav);
  EXPECT_NEAR(sb.g_eff, osc.g * cav.kappa / std::sqrt(cav.kappa * cav.kappa + osc.omega * osc.omega), 1e-9);
  EXPECT_NEAR(sb.phi, std::atan(osc.omega / cav.kappa), 1e-15);
  // Negative-mass oscillators get the mirrored phase delay.
  osc.omega = -osc.omega;
  EXPECT_NEAR(sideband_correction(osc, cav).phi, -sb.phi, 1e-15);
  // Bad-cavity limit: kappa >> omega leaves g unchanged.
  cav.kappa = kTwoPi * 5e12;
  EXPECT_NEAR(sideband_correction(osc, cav).g_eff / osc.g, 1.0, 1e-12);
}

TEST(Model, SidebandRegimeRejected) {
  auto cav = fixtures::cavity();
  auto osc = fixtures::oscillator(125e3, 2e3, 0.0);
  cav.kappa = 50.0 * osc.gamma;
  EXPECT_THROW(sideband_correction(osc, cav), ValidationError);
}

TEST(Model, DerivedRatesOfValidatedConfig) {
  const auto cfg = validate(config_from_json(base_doc()));
  ASSERT_EQ(cfg.size(), 2u);
  const auto& m = cfg.modes()[1];
  EXPECT_LT(m.omega, 0.0);
  ASSERT_TRUE(m.cooperativity.has_value());
  EXPECT_NEAR(*m.cooperativity, 5.3, 1e-9);
  EXPECT_NEAR(m.thermal_rate, m.gamma * 1.5, 1e-9);
  EXPECT_NEAR(m.backaction_coupling * m.backaction_coupling, 2.0 * 5.3 * m.gamma, 1e-6);
  EXPECT_DOUBLE_EQ(cfg.shot_noise_psd(), shot_noise_psd(cfg.cavity()));
  ASSERT_EQ(cfg.resolution().size(), 1u);
  EXPECT_NEAR(cfg.resolution()[0].ratio, 260.0 / 2.0, 1e-9);
}

TEST(Model, UndampedOscillatorKeepsFiniteRates) {
  auto doc = base_doc();
  doc["oscillators"][0]["gamma_hz"] = 0.0;
  const auto cfg = validate(config_from_json(doc));
  const auto& m = cfg.modes()[0];
  EXPECT_FALSE(m.cooperativity.has_value());
  EXPECT_EQ(m.thermal_rate, 0.0);
  EXPECT_GT(m.backaction_coupling, 0.0);
  EXPECT_THROW(cooperativity(cfg.config().oscillators[0], cfg.cavity()), ValidationError);
}

TEST(Model, ValidationErrorsNameTheField) {
  const auto expect_field = [](nlohmann::json doc, const std::string& field) {
    try {
      validate(config_from_json(doc));
      ADD_FAILURE() << "expected failure for " << field;
    } catch (const ValidationError& e) {
      EXPECT_EQ(e.field(), field) << e.what();
    }
  };
  auto d = base_doc();
  d["cavity"]["epsilon"] = 1.5;
  expect_field(d, "cavity.epsilon");
  d = base_doc();
  d["oscillators"][0]["nu"] = -1;
  expect_field(d, "oscillators[0].nu");
  d = base_doc();
  d["oscillators"][0]["omega_hz"] = 0;
  expect_field(d, "oscillators[0].omega");
  d = base_doc();
  d["grid"]["fs_hz"] = 1e6;
  expect_field(d, "grid.fs");
  d = base_doc();
  d["oscillators"][0]["cooperativity"] = 2;
  expect_field(d, "oscillators[0]");
  d = base_doc();
  d["cavity"]["detuning_hz"] = 1e3;
  expect_field(d, "cavity.detuning_hz");
  d = base_doc();
  d.erase("grid");
  expect_field(d, "grid");
}

TEST(Model, LowQualityFactorWarns) {
  auto doc = base_doc();
  doc["oscillators"][0]["gamma_hz"] = 20e3;
  const auto cfg = validate(config_from_json(doc));
  ASSERT_FALSE(cfg.warnings().empty());
  EXPECT_NE(cfg.warnings()[0].find("oscillators[0]"), std::string::npos);
}

TEST(Model, JsonRoundTripAndStableHash) {
  const auto a = config_from_json(base_doc());
  const auto b = config_from_json(config_to_json(a));
  EXPECT_NEAR(b.oscillators[1].g, a.oscillators[1].g, 1e-9 * a.oscillators[1].g);
  EXPECT_EQ(config_hash(b), config_hash(config_from_json(config_to_json(b))));
  auto c = a;
  c.oscillators[0].nu = 2.0;
  EXPECT_NE(config_hash(a), config_hash(c));
  EXPECT_EQ(hash_hex(0x1234).size(), 16u);
}

TEST(Model, GridSizes) {
  const SamplingGrid g(5e6, 1e-3);
  EXPECT_EQ(g.nt(), 5000u);
  EXPECT_DOUBLE_EQ(g.time(10), 2e-6);
  const auto d = g.decimated(3);
  EXPECT_EQ(d.nt(), 1667u);
  EXPECT_DOUBLE_EQ(d.time(1), 3.0 / 5e6);
  EXPECT_THROW(SamplingGrid(5e6, 1e-7), ValidationError);
  EXPECT_THROW(SamplingGrid(-1.0, 1.0), ValidationError);
}

TEST(Model, MissingConfigFileIsIoError) {
  EXPECT_THROW(load_config("/nonexistent/config.json"), IoError);
}
