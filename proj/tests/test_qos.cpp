// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "mcbf/error.hpp"
#include "mcbf/qos.hpp"
#include "mcbf/scenario.hpp"
#include "oracles.hpp"

using namespace mcbf;

namespace {

ChannelSet make_channels(const std::vector<CMat>& h) {
  ChannelSet ch;
  ch.H = h;
  for (const auto& m : h) ch.beta.push_back(RVec::Ones(m.cols()));
  return ch;
}

BeamformerSet random_w(std::mt19937_64& rng, int groups, int n) {
  BeamformerSet w;
  for (int i = 0; i < groups; ++i) w.push_back(oracle::random_cmat(rng, n, 1));
  return w;
}

RVec random_positive(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.1, 2.0);
  RVec v(n);
  for (int i = 0; i < n; ++i) v(i) = u(rng);
  return v;
}

}  // namespace

TEST(Metrics, SinrMatchesDefinition) {
  std::mt19937_64 rng(1);
  auto cfg = SystemConfig::uniform(3, 2, 5);
  auto ch = gen_normalized_channels(cfg, 1);
  auto w = random_w(rng, 3, 5);
  const RVec s = sinr(w, ch, 0.7);
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      const CVec h = ch.h(i, k);
      double interference = 0.7;
      for (int j = 0; j < 3; ++j)
        if (j != i) interference += std::norm(w[static_cast<std::size_t>(j)].dot(h));
      EXPECT_NEAR(s(cfg.offset(i) + k), std::norm(w[static_cast<std::size_t>(i)].dot(h)) / interference, 1e-12);
    }
  }
  double p = 0.0;
  for (const auto& wi : w) p += wi.squaredNorm();
  EXPECT_NEAR(total_power(w), p, 1e-12);
  const RVec gamma = cfg.gamma();
  EXPECT_NEAR(min_sinr_ratio(w, ch, gamma, 0.7), (s.array() / gamma.array()).minCoeff(), 1e-14);
  EXPECT_EQ(meets_targets(w, ch, gamma, 0.7), (s.array() >= gamma.array() * (1 - kSinrSlack)).all());
}

TEST(Metrics, ScaleCovariance) {
  std::mt19937_64 rng(2);
  auto cfg = SystemConfig::uniform(2, 3, 4);
  auto ch = gen_normalized_channels(cfg, 2);
  auto w = random_w(rng, 2, 4);
  auto w3 = w;
  for (auto& x : w3) x *= 3.0;
  EXPECT_LE((sinr(w, ch, 1.0) - sinr(w3, ch, 9.0)).norm(), 1e-12 * sinr(w, ch, 1.0).norm());
}

TEST(Metrics, RejectsShapeMismatch) {
  auto ch = gen_normalized_channels(SystemConfig::uniform(2, 2, 4), 1);
  BeamformerSet w(1, CVec::Ones(4));
  EXPECT_THROW(sinr(w, ch, 1.0), Error);
  BeamformerSet w2(2, CVec::Ones(3));
  EXPECT_THROW(sinr(w2, ch, 1.0), Error);
}

TEST(BuildR, ExplicitSum) {
  std::mt19937_64 rng(3);
  auto cfg = SystemConfig::uniform(3, 2, 6);
  auto ch = gen_normalized_channels(cfg, 3);
  const RVec lambda = random_positive(rng, 6);
  const RVec gamma = random_positive(rng, 6);
  CMat r = CMat::Identity(6, 6);
  std::vector<CMat> own(3, CMat::Zero(6, 6));
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 2; ++k) {
      const int u = cfg.offset(i) + k;
      const CVec h = ch.h(i, k);
      own[static_cast<std::size_t>(i)] += lambda(u) * gamma(u) * h * h.adjoint();
    }
    r += own[static_cast<std::size_t>(i)];
  }
  EXPECT_LE((build_R(lambda, ch, gamma) - r).norm(), 1e-12 * r.norm());
  for (int i = 0; i < 3; ++i) {
    const CMat rm = r - own[static_cast<std::size_t>(i)];
    EXPECT_LE((build_R_minus(lambda, ch, gamma, i) - rm).norm(), 1e-12 * r.norm());
  }
  EXPECT_TRUE(is_hermitian(build_R(lambda, ch, gamma)));
  EXPECT_GE(min_eigenvalue(build_R(lambda, ch, gamma)), 1.0 - 1e-12);
}

TEST(Assembly, FormsAgreeThroughAlpha) {
  std::mt19937_64 rng(4);
  auto cfg = SystemConfig::uniform(2, 3, 8);
  auto ch = gen_normalized_channels(cfg, 4);
  const RVec lambda = random_positive(rng, 6);
  const RVec gamma = random_positive(rng, 6);
  std::vector<CVec> a;
  for (int i = 0; i < 2; ++i) a.push_back(oracle::random_cmat(rng, 3, 1));
  const auto w = assemble_beamformer(lambda, a, ch, gamma);
  const CMat r = build_R(lambda, ch, gamma);
  for (int i = 0; i < 2; ++i) {
    const auto& wi = w[static_cast<std::size_t>(i)];
    EXPECT_LE((r * wi - ch.H[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)]).norm(), 1e-10 * wi.norm());
  }
  const auto alpha = alpha_from_a(lambda, a, ch, gamma);
  const auto w_alt = assemble_beamformer_alt(lambda, alpha, ch, gamma);
  for (int i = 0; i < 2; ++i) {
    EXPECT_LE((w[static_cast<std::size_t>(i)] - w_alt[static_cast<std::size_t>(i)]).norm(),
              1e-10 * w[static_cast<std::size_t>(i)].norm());
  }
}

TEST(Assembly, GroupDelta) {
  std::mt19937_64 rng(5);
  auto cfg = SystemConfig::uniform(2, 2, 3);
  auto ch = gen_normalized_channels(cfg, 5);
  auto w = random_w(rng, 2, 3);
  auto d = group_delta(w, ch);
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k)
      EXPECT_LE(std::abs(d[static_cast<std::size_t>(i)](k) - ch.h(i, k).dot(w[static_cast<std::size_t>(i)])), 1e-14);
}

TEST(NormalizePhase, FirstEntryRealPositive) {
  std::vector<CVec> a{CVec(2), CVec(3)};
  a[0] << cdouble(0.0, -2.0), cdouble(1.0, 1.0);
  a[1] << cdouble(0.0, 0.0), cdouble(-3.0, 0.0), cdouble(0.0, 1.0);
  const auto before = a;
  normalize_phase(a);
  EXPECT_NEAR(a[0](0).real(), 2.0, 1e-14);
  EXPECT_NEAR(a[0](0).imag(), 0.0, 1e-14);
  EXPECT_NEAR(a[1](1).real(), 3.0, 1e-14);
  EXPECT_NEAR(a[1](1).imag(), 0.0, 1e-14);
  for (int i = 0; i < 2; ++i) EXPECT_LE(collinearity_sine(a[static_cast<std::size_t>(i)], before[static_cast<std::size_t>(i)]), 1e-12);
}

TEST(Unicast, SingleUserIsMatchedFilter) {
  CMat h(3, 1);
  h << cdouble(1.0, 0.5), cdouble(-0.3, 0.2), cdouble(0.0, 2.0);
  auto ch = make_channels({h});
  RVec gamma(1);
  gamma << 4.0;
  auto sol = unicast_reference(ch, gamma, 0.5);
  const double expected = 4.0 * 0.5 / h.squaredNorm();
  EXPECT_NEAR(total_power(sol.w), expected, 1e-10 * expected);
  EXPECT_LE(collinearity_sine(sol.w[0], h.col(0)), 1e-10);
  EXPECT_NEAR(sol.lambda(0), 1.0 / h.squaredNorm(), 1e-10);
}

TEST(Unicast, OrthogonalUsersDecouple) {
  CMat h1 = CMat::Zero(3, 1), h2 = CMat::Zero(3, 1);
  h1(0, 0) = 2.0;
  h2(2, 0) = cdouble(0.0, 0.5);
  auto ch = make_channels({h1, h2});
  RVec gamma(2);
  gamma << 10.0, 3.0;
  auto sol = unicast_reference(ch, gamma, 1.0);
  EXPECT_NEAR(sol.power(0), 10.0 / 4.0, 1e-9);
  EXPECT_NEAR(sol.power(1), 3.0 / 0.25, 1e-9);
  EXPECT_NEAR(total_power(sol.w), 2.5 + 12.0, 1e-9);
}

// Brute force over beam directions on a 2-antenna, 2-user instance; powers
// for fixed directions come from the 2x2 linear system of active targets.
TEST(Unicast, DirectionGridOracle) {
  std::mt19937_64 rng(6);
  const double pi = std::acos(-1.0);
  for (int t = 0; t < 3; ++t) {
    CMat h1 = oracle::random_cmat(rng, 2, 1), h2 = oracle::random_cmat(rng, 2, 1);
    auto ch = make_channels({h1, h2});
    RVec gamma(2);
    gamma << 2.0, 1.5;
    auto sol = unicast_reference(ch, gamma, 1.0);
    const int steps = 48;
    std::vector<CVec> dirs;
    for (int a = 0; a <= steps; ++a) {
      for (int b = 0; b < 2 * steps; ++b) {
        const double th = 0.5 * pi * a / steps, ph = pi * b / steps;
        CVec u(2);
        u << std::cos(th), std::polar(std::sin(th), ph);
        dirs.push_back(u);
      }
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& u1 : dirs) {
      const double g11 = std::norm(u1.dot(h1.col(0))), g12 = std::norm(u1.dot(h2.col(0)));
      for (const auto& u2 : dirs) {
        const double g22 = std::norm(u2.dot(h2.col(0))), g21 = std::norm(u2.dot(h1.col(0)));
        // p1 g11 = gamma1 (p2 g21 + 1), p2 g22 = gamma2 (p1 g12 + 1)
        const double det = g11 * g22 - gamma(0) * gamma(1) * g21 * g12;
        if (det <= 0.0) continue;
        const double p1 = gamma(0) * (g22 + gamma(1) * g21) / det;
        const double p2 = gamma(1) * (g11 + gamma(0) * g12) / det;
        best = std::min(best, p1 + p2);
      }
    }
    const double p = total_power(sol.w);
    EXPECT_LE(p, best * (1.0 + 1e-9)) << "instance " << t;
    EXPECT_NEAR(p, best, 1e-2 * best) << "instance " << t;
  }
}

TEST(Unicast, IdentitiesAtTheOptimum) {
  auto cfg = SystemConfig::uniform(4, 1, 6, 6.0);
  auto ch = gen_normalized_channels(cfg, 7);
  const RVec gamma = cfg.gamma();
  auto sol = unicast_reference(ch, gamma, 0.8);
  const double p = total_power(sol.w);
  EXPECT_NEAR(p, power_identity(sol.lambda, gamma, 0.8), 1e-8 * p);
  EXPECT_LE((sinr(sol.w, ch, 0.8).array() / gamma.array() - 1.0).abs().maxCoeff(), 1e-8);
  EXPECT_LE(structure_residual(sol.w, sol.lambda, ch, gamma).maxCoeff(), 1e-9);
  EXPECT_LE(duality_check(sol.w, sol.lambda, ch, gamma).maxCoeff(), 1e-8);
  // the optimum is recovered by assembling from lambda and consistent weights
  const auto delta = group_delta(sol.w, ch);
  std::vector<CVec> a;
  for (int i = 0; i < 4; ++i) {
    const int u = cfg.offset(i);
    a.push_back(CVec::Constant(1, sol.lambda(u) * delta[static_cast<std::size_t>(i)](0) * (1.0 + gamma(u))));
  }
  const auto w = assemble_beamformer(sol.lambda, a, ch, gamma);
  for (int i = 0; i < 4; ++i)
    EXPECT_LE((w[static_cast<std::size_t>(i)] - sol.w[static_cast<std::size_t>(i)]).norm(), 1e-8 * sol.w[static_cast<std::size_t>(i)].norm());
  EXPECT_LE(weight_relation_residual(sol.lambda, a, sol.w, ch, gamma), 1e-10);
  const auto alpha = alpha_from_a(sol.lambda, a, ch, gamma);
  for (int i = 0; i < 4; ++i) {
    const int u = cfg.offset(i);
    EXPECT_LE(std::abs(alpha[static_cast<std::size_t>(i)](0) - a[static_cast<std::size_t>(i)](0) / (1.0 + gamma(u))),
              1e-8 * std::abs(a[static_cast<std::size_t>(i)](0)));
  }
}

TEST(Unicast, InfeasibleTargets) {
  CMat h1(2, 1), h2(2, 1);
  h1 << 1.0, 0.0;
  h2 << 1.0, 0.0;
  auto ch = make_channels({h1, h2});
  RVec gamma(2);
  gamma << 2.0, 2.0;
  try {
    unicast_reference(ch, gamma, 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Infeasible);
  }
}

TEST(StructureResidual, DetectsOffSubspaceBeam) {
  auto cfg = SystemConfig::uniform(2, 1, 6);
  auto ch = gen_normalized_channels(cfg, 8);
  const RVec gamma = cfg.gamma();
  auto sol = unicast_reference(ch, gamma, 1.0);
  auto w = sol.w;
  CVec off = CVec::Ones(6);
  const CMat rh = hermitian_solve(build_R(sol.lambda, ch, gamma), ch.H[0]);
  off -= rh * (rh.adjoint() * rh).ldlt().solve(rh.adjoint() * off);
  w[0] += off;
  const RVec res = structure_residual(w, sol.lambda, ch, gamma);
  EXPECT_NEAR(res(0), off.norm() / w[0].norm(), 1e-9);
  EXPECT_LE(res(1), 1e-9);
}
