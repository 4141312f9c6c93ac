// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference solutions shared by the unit tests and the
// acceptance runner.
#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include "mcbf/direct.hpp"
#include "mcbf/linalg.hpp"
#include "mcbf/multicast.hpp"
#include "mcbf/qcqp.hpp"
#include "mcbf/sdp.hpp"

namespace oracle {

using namespace mcbf;

inline CMat random_cmat(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = cdouble(n(rng), n(rng));
  return m;
}

inline RMat random_rmat(std::mt19937_64& rng, int r, int c) {
  std::normal_distribution<double> n(0.0, 1.0);
  RMat m(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) m(i, j) = n(rng);
  return m;
}

inline QuadraticConstraint ball(const RVec& center, double radius) {
  const auto n = center.size();
  return {RMat::Identity(n, n), -center, center.squaredNorm() - radius * radius, RMat()};
}

// Strictly convex objective, two ellipsoids with the origin inside.
inline ConvexQcqp random_qcqp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RMat m = random_rmat(rng, 4, 4);
  ConvexQcqp p;
  p.q0_mat = 0.25 * m.transpose() * m + 0.1 * RMat::Identity(4, 4);
  p.q0_vec = random_rmat(rng, 4, 1);
  for (int k = 0; k < 2; ++k) {
    RMat e = random_rmat(rng, 4, 4);
    QuadraticConstraint c;
    c.q_mat = e.transpose() * e + 0.5 * RMat::Identity(4, 4);
    c.q_vec = 0.3 * random_rmat(rng, 4, 1);
    c.c = -1.0 - u(rng) * 0.5;
    p.constraints.push_back(c);
  }
  return p;
}

// Coarse-to-fine grid search over a box, ending at step 1e-3.
inline double qcqp_grid(const ConvexQcqp& p, RVec center, double half_width) {
  const int n = static_cast<int>(p.dim());
  const int pts = 21;
  double best = std::numeric_limits<double>::infinity();
  double step = 2.0 * half_width / (pts - 1);
  while (true) {
    RVec best_x = center;
    std::vector<int> idx(static_cast<std::size_t>(n), 0);
    RVec x(n);
    for (;;) {
      for (int d = 0; d < n; ++d) x(d) = center(d) + (idx[static_cast<std::size_t>(d)] - pts / 2) * step;
      if (p.max_violation(x) <= 0.0) {
        const double f = p.objective(x);
        if (f < best) {
          best = f;
          best_x = x;
        }
      }
      int d = 0;
      while (d < n && ++idx[static_cast<std::size_t>(d)] == pts) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == n) break;
    }
    center = best_x;
    if (step <= 1e-3) break;
    step = std::max(1e-3, step / 4.0);
  }
  return best;
}

struct SdpFixture {
  const char* name;
  SdpProblem problem;
  std::optional<double> objective;  // known optimum, if any
};

inline std::vector<SdpFixture> sdp_fixtures() {
  std::vector<SdpFixture> out;
  {
    SdpProblem p;
    p.objective.push_back(CMat::Identity(2, 2));
    p.constraints.push_back({{{0, LowRankHermitian::from_dense(CMat::Identity(2, 2))}}, 1.0});
    out.push_back({"trace at least one", p, 1.0});
  }
  {
    // min 2 x1 + 3 x2 s.t. x1 + x2 >= 1, x1 >= 0.25
    SdpProblem p;
    CMat c = CMat::Zero(2, 2);
    c(0, 0) = 2.0;
    c(1, 1) = 3.0;
    p.objective.push_back(c);
    p.constraints.push_back({{{0, LowRankHermitian::from_dense(CMat::Identity(2, 2))}}, 1.0});
    p.constraints.push_back({{{0, LowRankHermitian::rank_one(CVec::Unit(2, 0), 1.0)}}, 0.25});
    out.push_back({"diagonal LP", p, 2.0});
  }
  std::mt19937_64 rng(6);
  for (int t = 0; t < 5; ++t) {
    RMat mc = random_rmat(rng, 3, 3);
    SdpProblem p;
    p.objective.push_back((mc.transpose() * mc + 0.2 * RMat::Identity(3, 3)).cast<cdouble>());
    for (int k = 0; k < 2; ++k) {
      RMat ma = random_rmat(rng, 3, 3);
      p.constraints.push_back(
          {{{0, LowRankHermitian::from_dense((ma.transpose() * ma + 0.1 * RMat::Identity(3, 3)).cast<cdouble>())}}, 1.0});
    }
    out.push_back({"random real 3x3", p, std::nullopt});
  }
  std::mt19937_64 rng2(7);
  for (int t = 0; t < 5; ++t) {
    SdpProblem p;
    CMat mc = random_cmat(rng2, 4, 4);
    p.objective.push_back(mc.adjoint() * mc + CMat::Identity(4, 4));
    for (int k = 0; k < 3; ++k) {
      p.constraints.push_back({{{0, LowRankHermitian::rank_one(random_cmat(rng2, 4, 1), 1.0)}}, 1.0});
    }
    out.push_back({"random complex 4x4", p, std::nullopt});
  }
  return out;
}

// Real single-block fixture with two constraints tr(A X) >= 1: a rank-one
// optimum exists, found by scanning directions on the unit sphere.
inline double sphere_grid(const SdpProblem& p, int steps = 600) {
  const double pi = std::acos(-1.0);
  const RMat c = p.objective[0].real();
  std::vector<RMat> a;
  for (const auto& con : p.constraints) a.push_back(con.terms[0].coef.dense().real());
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= steps; ++i) {
    const double th = pi * i / steps;
    for (int j = 0; j < 2 * steps; ++j) {
      const double ph = pi * j / steps;
      RVec x(3);
      x << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      double scale = 0.0;
      for (const auto& ak : a) scale = std::max(scale, 1.0 / x.dot(ak * x));
      best = std::min(best, scale * x.dot(c * x));
    }
  }
  return best;
}

// Two groups: minimum of p1 |x1|^2 + p2 |x2|^2 over a grid p in [0, p_max]^2.
inline double scaling_grid(const MulticastProblem& problem, const std::vector<CVec>& directions, double p_max,
                           double step = 1e-3) {
  const int steps = static_cast<int>(std::ceil(p_max / step));
  const int kt = problem.k_tot();
  RMat gain(2, kt);
  for (int j = 0; j < 2; ++j)
    for (int u = 0; u < kt; ++u) gain(j, u) = std::norm(directions[static_cast<std::size_t>(j)].dot(problem.cross[static_cast<std::size_t>(j)].col(u)));
  const double n0 = std::real(directions[0].dot(problem.gram[0] * directions[0]));
  const double n1 = std::real(directions[1].dot(problem.gram[1] * directions[1]));
  double best = std::numeric_limits<double>::infinity();
  for (int a = 0; a <= steps; ++a) {
    for (int b = 0; b <= steps; ++b) {
      const double p[2] = {a * step, b * step};
      bool ok = true;
      for (int u = 0; u < kt && ok; ++u) {
        const int i = problem.group_of(u);
        const double s = p[i] * gain(i, u) / (p[1 - i] * gain(1 - i, u) + problem.sigma2);
        ok = s >= problem.gamma(u);
      }
      if (ok) best = std::min(best, p[0] * n0 + p[1] * n1);
    }
  }
  return best;
}

}  // namespace oracle
