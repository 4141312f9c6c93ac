// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"
#include "mcbf/scenario.hpp"

using namespace mcbf;

#ifndef MCBF_TEST_DATA
#define MCBF_TEST_DATA "tests/data"
#endif

TEST(Philox, KnownAnswers) {
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (PhiloxBlock{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (PhiloxBlock{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (PhiloxBlock{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(CounterRng, PureFunctionOfIndex) {
  CounterRng a(42, 3), b(42, 3), c(42, 4), d(43, 3);
  for (std::uint64_t i = 0; i < 100; ++i) {
    EXPECT_EQ(a.uniform2(i), b.uniform2(i));
    EXPECT_NE(a.uniform2(i), c.uniform2(i));
    EXPECT_NE(a.uniform2(i), d.uniform2(i));
  }
  // out-of-order evaluation gives the same values
  const auto late = a.uniform2(99);
  CounterRng e(42, 3);
  EXPECT_EQ(e.uniform2(99), late);
}

TEST(CounterRng, UniformRangeAndMoments) {
  CounterRng rng(5);
  double sum = 0.0, power = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto u = rng.uniform2(static_cast<std::uint64_t>(i));
    ASSERT_GT(u[0], 0.0);
    ASSERT_LT(u[0], 1.0);
    ASSERT_GT(u[1], 0.0);
    ASSERT_LT(u[1], 1.0);
    sum += u[0];
    power += std::norm(rng.complex_normal(static_cast<std::uint64_t>(i)));
  }
  EXPECT_NEAR(sum / n, 0.5, 5.0 * std::sqrt(1.0 / 12.0 / n));
  EXPECT_NEAR(power / n, 1.0, 5.0 / std::sqrt(n));
}

TEST(Config, UniformAndOffsets) {
  auto cfg = SystemConfig::uniform(3, 4, 20, 6.0);
  EXPECT_EQ(cfg.k_tot(), 12);
  EXPECT_EQ(cfg.offset(0), 0);
  EXPECT_EQ(cfg.offset(2), 8);
  EXPECT_NEAR(cfg.gamma()(5), std::pow(10.0, 0.6), 1e-12);
  EXPECT_NO_THROW(cfg.validate());
  cfg.sigma2 = 0.0;
  EXPECT_THROW(cfg.validate(), Error);
  cfg = SystemConfig::uniform(2, 2, 4);
  cfg.gamma_db.pop_back();
  EXPECT_THROW(cfg.validate(), Error);
}

TEST(NormalizedChannels, ShapesAndLawOfLargeNumbers) {
  auto cfg = SystemConfig::uniform(3, 5, 200);
  auto ch = gen_normalized_channels(cfg, 9);
  ASSERT_EQ(ch.groups(), 3);
  EXPECT_EQ(ch.antennas(), 200);
  EXPECT_EQ(ch.k_tot(), 15);
  EXPECT_EQ(ch.stacked().cols(), 15);
  double sum = 0.0;
  for (const auto& h : ch.H) sum += h.squaredNorm();
  EXPECT_NEAR(sum / (200.0 * 15.0), 1.0, 5.0 / std::sqrt(3000.0));
  for (const auto& b : ch.beta) EXPECT_TRUE((b.array() == 1.0).all());
  EXPECT_NO_THROW(ch.check(cfg));
  EXPECT_THROW(ch.check(SystemConfig::uniform(3, 5, 100)), Error);
}

TEST(NormalizedChannels, ReproducibleAndIndependent) {
  auto cfg = SystemConfig::uniform(2, 3, 16);
  EXPECT_TRUE(gen_normalized_channels(cfg, 4) == gen_normalized_channels(cfg, 4));
  auto a = gen_normalized_channels(cfg, 4).stacked();
  auto b = gen_normalized_channels(cfg, 5).stacked();
  const double corr = std::abs(a.cwiseProduct(b.conjugate()).sum()) / (a.norm() * b.norm());
  EXPECT_LT(corr, 0.2);
  // growing N keeps the draws for the other seed independent but still reproducible
  auto cfg2 = SystemConfig::uniform(2, 3, 32);
  EXPECT_TRUE(gen_normalized_channels(cfg2, 4) == gen_normalized_channels(cfg2, 4));
}

TEST(PathlossChannels, ConstantAndBetaLaw) {
  EXPECT_NEAR(pathloss_constant(1.0), std::pow(10.0, -0.5), 1e-15);
  EXPECT_NEAR(pathloss_constant(2.0), 2.0 * std::pow(10.0, -0.5), 1e-15);
  const double xi = pathloss_constant(1.0);
  EXPECT_NEAR(xi / std::pow(0.5, 3) / (xi / 1.0), 8.0, 1e-12);

  auto cfg = SystemConfig::uniform(4, 50, 4);
  cfg.channel_model = ChannelModel::Pathloss;
  std::vector<double> d;
  for (std::uint64_t s = 0; s < 10; ++s) {
    auto draw = gen_pathloss_channels(cfg, s);
    for (int i = 0; i < cfg.G; ++i) {
      for (int k = 0; k < 50; ++k) {
        const double dist = draw.distances[static_cast<std::size_t>(i)](k);
        ASSERT_GE(dist, kInnerRadius);
        ASSERT_LE(dist, 1.0);
        EXPECT_NEAR(draw.channels.beta[static_cast<std::size_t>(i)](k), xi / (dist * dist * dist), 1e-12);
        d.push_back(dist);
      }
    }
  }
  // uniform over the annulus: F(d) = (d^2 - r0^2) / (1 - r0^2)
  std::sort(d.begin(), d.end());
  const double r0 = kInnerRadius;
  double ks = 0.0;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const double f = (d[j] * d[j] - r0 * r0) / (1.0 - r0 * r0);
    ks = std::max(ks, std::abs(f - static_cast<double>(j + 1) / static_cast<double>(d.size())));
  }
  EXPECT_LT(ks, 1.63 / std::sqrt(static_cast<double>(d.size())));
}

TEST(PathlossChannels, ChannelVarianceFollowsBeta) {
  auto cfg = SystemConfig::uniform(1, 3, 4000);
  cfg.channel_model = ChannelModel::Pathloss;
  auto ch = gen_channels(cfg, 3);
  for (int k = 0; k < 3; ++k) {
    const double b = ch.beta[0](k);
    EXPECT_NEAR(ch.h(0, k).squaredNorm() / (4000.0 * b), 1.0, 0.1);
  }
}

TEST(ScenarioJson, RoundTrip) {
  auto cfg = SystemConfig::uniform(2, 3, 5, 7.5);
  cfg.gamma_db[1] = 3.0;
  cfg.P = 20.0;
  cfg.seed = 99;
  Scenario s{cfg, gen_normalized_channels(cfg, 99)};
  const Scenario back = scenario_from_json(scenario_to_json(s));
  EXPECT_TRUE(back == s);
  Scenario bare{cfg, std::nullopt};
  EXPECT_TRUE(scenario_from_json(scenario_to_json(bare)) == bare);
}

TEST(ScenarioJson, MissingFieldIsParseError) {
  const std::string text = R"({"G": 1, "K": [1], "N": 2, "gamma_db": [10.0], "P": 1.0})";
  try {
    scenario_from_json(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("sigma2"), std::string::npos);
  }
  EXPECT_THROW(scenario_from_json("{not json"), Error);
}

TEST(ScenarioJson, GoldenFixturesRegenerate) {
  for (const char* name : {"golden_normalized.json", "golden_pathloss.json"}) {
    const Scenario s = load_scenario(std::string(MCBF_TEST_DATA) + "/" + name);
    ASSERT_TRUE(s.channels.has_value()) << name;
    EXPECT_TRUE(gen_channels(s.config, s.config.seed) == *s.channels) << name;
  }
}
