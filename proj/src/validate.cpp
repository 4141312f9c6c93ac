// SPDX-License-Identifier: Apache-2.0
#include "mcbf/validate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "mcbf/bench.hpp"
#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

namespace {

std::size_t ix(int k) { return static_cast<std::size_t>(k); }

struct Ctx {
  std::uint64_t seed;
  double corrupt;

  std::uint64_t instance(std::uint32_t family, int trial) const {
    return seed * 1000003ULL + family * 10007ULL + static_cast<std::uint64_t>(trial);
  }
  CounterRng rng(std::uint32_t stream) const { return CounterRng(seed, 1000 + stream); }
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

CMat random_cmat(const CounterRng& rng, std::uint64_t& idx, int rows, int cols) {
  CMat m(rows, cols);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) m(r, c) = rng.complex_normal(idx++);
  }
  return m;
}

CVec random_cvec(const CounterRng& rng, std::uint64_t& idx, int n) { return random_cmat(rng, idx, n, 1).col(0); }

RVec random_lambda(const CounterRng& rng, std::uint64_t& idx, int n, double scale) {
  RVec l(n);
  for (int k = 0; k < n; ++k) l(k) = scale * 2.0 * rng.uniform(idx++);
  return l;
}

double max_relative_diff(const BeamformerSet& a, const BeamformerSet& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (a[i] - b[i]).norm() / std::max(a[i].norm(), 1e-300));
  }
  return worst;
}

BeamformerSet corrupted(BeamformerSet w, double corrupt) {
  for (auto& wi : w) wi *= std::sqrt(1.0 + corrupt);
  return w;
}

double mean(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : std::accumulate(v.begin(), v.end(), 0.0) / v.size();
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

// ---------------------------------------------------------------- numerics

std::vector<CheckResult> numerics_lift(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(1);
  std::uint64_t idx = 0;
  double worst = 0.0;
  for (int d = 0; d < 100; ++d) {
    const int n = 1 + d % 6;
    const CMat m = random_cmat(rng, idx, n, n);
    const CMat a = m + m.adjoint();
    const CVec z = random_cvec(rng, idx, n);
    const double complex_form = std::real(z.dot(a * z));
    const RVec x = lift_vector(z);
    const double lifted = x.dot(lift_hermitian(a) * x);
    worst = std::max(worst, std::abs(lifted - complex_form) / (1.0 + std::abs(complex_form)));
  }
  return {check_at_most("numerics.lift_roundtrip", worst, 1e-12, "100 random Hermitian forms")};
}

std::vector<CheckResult> numerics_sdp_duality(const Ctx& ctx) {
  double worst = -std::numeric_limits<double>::infinity();
  int counted = 0;
  for (int trial = 0; trial < 3; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 50);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(1, trial));
    const RVec gamma = cfg.gamma();
    const LambdaResult lam = fixed_point_lambda(ch, gamma);
    const ReducedProblem rp = build_reduced_problem(ch, lam.lambda, gamma, cfg.sigma2);
    const SdpResult res = solve_sdp(relaxation_sdp(rp.problem));
    for (const auto& it : res.trace) {
      if (it.primal_infeasibility > 1e-9 || it.dual_infeasibility > 1e-9) continue;
      ++counted;
      const double scale = 1.0 + std::abs(it.primal_objective) + std::abs(it.dual_objective);
      worst = std::max(worst, (it.dual_objective - it.primal_objective) / scale);
    }
  }
  if (counted == 0) worst = 0.0;
  return {check_at_most("numerics.sdp_weak_duality", worst, 1e-9,
                        fmt("%.0f iterates with residuals <= 1e-9", counted))};
}

std::vector<CheckResult> numerics_qcqp_monotone(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(2);
  std::uint64_t idx = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 6;
    RMat m(n, n);
    for (int r = 0; r < n; ++r) {
      for (int c = 0; c < n; ++c) m(r, c) = 2.0 * rng.uniform(idx++) - 1.0;
    }
    ConvexQcqp p;
    p.q0_mat = m.transpose() * m + 0.1 * RMat::Identity(n, n);
    p.q0_vec = RVec(n);
    for (int r = 0; r < n; ++r) p.q0_vec(r) = 4.0 * rng.uniform(idx++) - 2.0;
    for (int k = 0; k < 3; ++k) {
      QuadraticConstraint q;
      RMat f(n, n);
      for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) f(r, c) = 2.0 * rng.uniform(idx++) - 1.0;
      }
      q.q_mat = f * f.transpose() + RMat::Identity(n, n);
      q.q_vec = RVec(n);
      for (int r = 0; r < n; ++r) q.q_vec(r) = 2.0 * rng.uniform(idx++) - 1.0;
      q.c = -1.0 - rng.uniform(idx++);
      p.constraints.push_back(q);
    }
    const QcqpResult res = solve_convex_qcqp(p, std::nullopt);
    const auto& tr = res.report.trajectory;
    for (std::size_t k = 1; k < tr.size(); ++k) {
      worst = std::max(worst, (tr[k] - tr[k - 1]) / (1.0 + std::abs(tr[k - 1])));
    }
  }
  return {check_at_most("numerics.qcqp_monotone", worst, 1e-12, "largest relative increase over 20 instances")};
}

std::vector<CheckResult> numerics_range(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(3);
  std::uint64_t idx = 0;
  double worst = 0.0;
  int rank_changes = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4 + trial % 12;
    const int k = 1 + trial % 6;
    CMat h = random_cmat(rng, idx, n, k);
    if (k > 1 && trial % 3 == 0) h.col(k - 1) = h.col(0) * cdouble(0.5, -2.0);
    const RangeBasis b = orthonormal_range(h);
    const RangeBasis again = orthonormal_range(b.u);
    if (again.rank != b.rank) ++rank_changes;
    const CMat p1 = b.u * b.u.adjoint();
    const CMat p2 = again.u * again.u.adjoint();
    worst = std::max(worst, (p1 - p2).norm());
  }
  return {check_at_most("numerics.range_idempotence", worst + rank_changes, 1e-9,
                        fmt("%.0f rank changes", rank_changes))};
}

// ---------------------------------------------------------------- scenario

std::vector<CheckResult> scenario_reproducibility(const Ctx& ctx) {
  SystemConfig cfg = SystemConfig::uniform(3, 5, 64);
  bool same = gen_channels(cfg, ctx.seed) == gen_channels(cfg, ctx.seed);
  cfg.channel_model = ChannelModel::Pathloss;
  same = same && gen_channels(cfg, ctx.seed) == gen_channels(cfg, ctx.seed);
  const bool differs = !(gen_channels(cfg, ctx.seed) == gen_channels(cfg, ctx.seed + 1));
  return {check_at_most("scenario.reproducibility", same && differs ? 0.0 : 1.0, 0.0,
                        "normalized and pathloss draws repeat per seed")};
}

std::vector<CheckResult> scenario_independence(const Ctx& ctx) {
  const SystemConfig cfg = SystemConfig::uniform(3, 5, 500);
  double sum = 0.0;
  int count = 0;
  for (int draw = 0; draw < 200; ++draw) {
    const CMat s = gen_normalized_channels(cfg, ctx.instance(2, draw)).stacked();
    const CMat gram = s.adjoint() * s;
    for (int a = 0; a < gram.rows(); ++a) {
      for (int b = a + 1; b < gram.cols(); ++b) {
        sum += std::abs(gram(a, b)) / cfg.N;
        ++count;
      }
    }
  }
  return {check_at_most("scenario.independence", sum / count, 0.08, "mean (1/N)|h^H h'| at N = 500, 200 draws")};
}

// ---------------------------------------------------------------- qos-core

struct SmallInstance {
  ChannelSet ch;
  RVec gamma;
  RVec lambda;
  std::vector<CVec> a;
};

SmallInstance small_instance(const Ctx& ctx, const CounterRng& rng, std::uint64_t& idx, int trial, int n_max) {
  const int n = 2 + trial % (n_max - 1);
  const int g = 1 + trial % 3;
  const int k = 1 + (trial / 3) % 4;
  SystemConfig cfg = SystemConfig::uniform(g, k, n);
  SmallInstance out;
  out.ch = gen_normalized_channels(cfg, ctx.instance(3, trial));
  out.gamma = cfg.gamma();
  out.lambda = random_lambda(rng, idx, cfg.k_tot(), 1.0 / n);
  for (int i = 0; i < g; ++i) out.a.push_back(random_cvec(rng, idx, k));
  return out;
}

std::vector<CheckResult> qos_form_equivalence(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(4);
  std::uint64_t idx = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const SmallInstance s = small_instance(ctx, rng, idx, trial, 32);
    const BeamformerSet w1 = assemble_beamformer(s.lambda, s.a, s.ch, s.gamma);
    const BeamformerSet w2 =
        assemble_beamformer_alt(s.lambda, alpha_from_a(s.lambda, s.a, s.ch, s.gamma), s.ch, s.gamma);
    worst = std::max(worst, max_relative_diff(w1, w2));
  }
  return {check_at_most("qos.form_equivalence", worst, 1e-8, "100 random (lambda, a), N <= 32")};
}

std::vector<CheckResult> qos_scale_covariance(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(5);
  std::uint64_t idx = 0;
  double worst = 0.0;
  const cdouble factors[] = {cdouble(2.5, 0.0), cdouble(0.3, -1.7)};
  for (int trial = 0; trial < 20; ++trial) {
    const SmallInstance s = small_instance(ctx, rng, idx, trial, 32);
    const BeamformerSet w = assemble_beamformer(s.lambda, s.a, s.ch, s.gamma);
    for (cdouble c : factors) {
      std::vector<CVec> ca = s.a;
      BeamformerSet cw = w;
      for (auto& v : ca) v *= c;
      for (auto& v : cw) v *= c;
      worst = std::max(worst, max_relative_diff(cw, assemble_beamformer(s.lambda, ca, s.ch, s.gamma)));
    }
  }
  return {check_at_most("qos.scale_covariance", worst, 1e-12, "real and complex factors, 20 instances")};
}

std::vector<CheckResult> qos_eigen_floor(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(6);
  std::uint64_t idx = 0;
  double lowest = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    SmallInstance s = small_instance(ctx, rng, idx, trial, 32);
    if (trial % 4 == 0) s.lambda.setZero();
    if (trial % 4 == 1) s.lambda *= 1e4;
    lowest = std::min(lowest, min_eigenvalue(build_R(s.lambda, s.ch, s.gamma)));
  }
  return {check_at_least("qos.R_eigen_floor", lowest, 1.0 - 1e-10, "100 random lambda >= 0")};
}

struct UnicastCase {
  ChannelSet ch;
  SystemConfig cfg;
  UnicastSolution sol;
};

std::vector<UnicastCase> unicast_cases(const Ctx& ctx, int trials, int* infeasible) {
  std::vector<UnicastCase> out;
  for (int trial = 0; trial < trials; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 1, 8);
    ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(4, trial));
    try {
      UnicastSolution sol = unicast_reference(ch, cfg.gamma(), cfg.sigma2);
      out.push_back({std::move(ch), cfg, std::move(sol)});
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Infeasible) throw;
      ++*infeasible;
    }
  }
  return out;
}

std::vector<CheckResult> qos_unicast(const Ctx& ctx) {
  int infeasible = 0;
  const auto cases = unicast_cases(ctx, 20, &infeasible);
  double gap = 0.0, slack = 0.0, identity = 0.0, dual = 0.0, dual_scaled = 0.0;
  for (const auto& c : cases) {
    const RVec gamma = c.cfg.gamma();
    const BeamformerSet w = corrupted(c.sol.w, ctx.corrupt);
    const double p = total_power(w);
    const DirectResult d = direct_sdr_qos(c.ch, gamma, c.cfg.sigma2);
    gap = std::max(gap, std::abs(p - d.lower_bound) / d.lower_bound);
    const RVec ratio = sinr(w, c.ch, c.cfg.sigma2).cwiseQuotient(gamma);
    slack = std::max(slack, (ratio.array() - 1.0).abs().maxCoeff());
    identity = std::max(identity, std::abs(p - power_identity(c.sol.lambda, gamma, c.cfg.sigma2)) / p);
    const RVec dc = duality_check(w, c.sol.lambda, c.ch, gamma);
    dual = std::max(dual, dc.maxCoeff());
    BeamformerSet scaled = w;
    for (auto& v : scaled) v *= cdouble(3.0, -1.0);
    dual_scaled = std::max(dual_scaled, (duality_check(scaled, c.sol.lambda, c.ch, gamma) - dc).cwiseAbs().maxCoeff());
  }
  const std::string detail = fmt("%.0f unicast instances (G=3, N=8), %.0f infeasible", cases.size(), infeasible);
  return {check_at_most("qos.unicast_sdr_gap", gap, 1e-4, detail),
          check_at_most("qos.unicast_slack", slack, 1e-8, detail),
          check_at_most("qos.power_identity", identity, 1e-6, detail),
          check_at_most("qos.duality_check", dual, 1e-8, detail),
          check_at_most("qos.duality_scale_invariance", dual_scaled, 1e-12, detail)};
}

std::vector<CheckResult> qos_structure(const Ctx& ctx) {
  const CounterRng rng = ctx.rng(7);
  std::uint64_t idx = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const SmallInstance s = small_instance(ctx, rng, idx, trial, 32);
    const BeamformerSet w = assemble_beamformer(s.lambda, s.a, s.ch, s.gamma);
    worst = std::max(worst, structure_residual(w, s.lambda, s.ch, s.gamma).maxCoeff());
  }
  return {check_at_most("qos.structure_residual", worst, 1e-9, "assembled beamformers, 20 instances")};
}

std::vector<CheckResult> qos_weight_relation(const Ctx& ctx) {
  double worst = 0.0;
  int consistent = 0, total = 0;
  for (int trial = 0; trial < 8; ++trial) {
    const SystemConfig cfg = trial < 5 ? SystemConfig::uniform(3, 1, 8) : SystemConfig::uniform(3, 5, 50);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(5, trial));
    const QosResult q = solve_qos(ch, cfg, QosMethod::OptSdr);
    ++total;
    if (!q.solution.consistent) continue;
    ++consistent;
    worst = std::max(worst, weight_relation_residual(q.solution.lambda, q.solution.weights.a, q.solution.w, ch,
                                                     cfg.gamma()));
  }
  return {check_at_most("qos.weight_relation", worst, 1e-8,
                        fmt("%.0f of %.0f solutions marked consistent", consistent, total))};
}

// ---------------------------------------------------------------- lambda-solver

std::vector<CheckResult> lambda_positivity_certificate(const Ctx& ctx) {
  double lowest = std::numeric_limits<double>::infinity();
  double cert = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 50);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(6, trial));
    const RVec gamma = cfg.gamma();
    LambdaOptions step;
    step.max_iter = 1;
    for (int l = 0; l < 30; ++l) {
      const LambdaResult r = fixed_point_lambda(ch, gamma, step);
      lowest = std::min(lowest, r.lambda.minCoeff() * cfg.N);
      step.init = r.lambda;
    }
    const LambdaResult full = fixed_point_lambda(ch, gamma);
    cert = std::max(cert, std::abs(full.report.residual - lambda_residual(full.lambda, ch, gamma)));
  }
  CheckResult pos = check_at_least("lambda.positivity", lowest, 0.0, "min N lambda over 30 iterates, 5 instances");
  pos.pass = lowest > 0.0;
  return {pos, check_at_most("lambda.certificate", cert, 1e-10, "reported vs recomputed residual")};
}

std::vector<CheckResult> lambda_prop2(const Ctx& ctx) {
  const int sizes[] = {50, 200, 500};
  std::vector<double> means;
  for (int n : sizes) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, n);
    const RVec gamma = cfg.gamma();
    double sum = 0.0;
    int count = 0;
    for (int trial = 0; trial < 100; ++trial) {
      const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(7, trial));
      const LambdaResult lam = fixed_point_lambda(ch, gamma);
      const HermitianFactor r(build_R(lam.lambda, ch, gamma));
      for (int i = 0; i < ch.groups(); ++i) {
        const CMat rh = r.solve(ch.H[ix(i)]);
        const CMat cross = ch.H[ix(i)].adjoint() * rh;
        const int off = cfg.offset(i);
        for (int k = 0; k < ch.users(i); ++k) {
          for (int l = 0; l < ch.users(i); ++l) {
            if (l == k) continue;
            sum += std::abs(lam.lambda(off + k) * (1.0 + gamma(off + k)) * cross(k, l));
            ++count;
          }
        }
      }
    }
    means.push_back(sum / count);
  }
  const double rise = std::max(means[1] - means[0], means[2] - means[1]);
  const std::string detail = fmt("means %.4f, %.4f, %.4f at N = 50, 200, 500", means[0], means[1], means[2]);
  return {check_at_most("lambda.prop2_decay", rise, 0.0, detail),
          check_at_most("lambda.prop2_level", means[2], 0.15, detail)};
}

std::vector<CheckResult> lambda_prop3(const Ctx& ctx) {
  SystemConfig cfg = SystemConfig::uniform(3, 5, 500);
  cfg.channel_model = ChannelModel::Pathloss;
  const RVec gamma = cfg.gamma();
  std::vector<double> lb;
  for (int trial = 0; trial < 20; ++trial) {
    const ChannelSet ch = gen_channels(cfg, ctx.instance(8, trial));
    const RVec v = fixed_point_lambda(ch, gamma).lambda.cwiseProduct(ch.beta_flat());
    lb.insert(lb.end(), v.data(), v.data() + v.size());
  }
  const double med = quantile(lb, 0.5);
  const double iqr = quantile(lb, 0.75) - quantile(lb, 0.25);
  return {check_at_most("lambda.prop3_concentration", iqr / med, 0.1,
                        fmt("IQR / median of lambda beta, median %.4g", med))};
}

// ---------------------------------------------------------------- weight-solver

std::vector<CheckResult> weights_suite(const Ctx& ctx) {
  double sandwich = 0.0, infeasible = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 50);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(9, trial));
    const RVec gamma = cfg.gamma();
    const QosResult sdr = solve_qos(ch, cfg, QosMethod::OptSdr);
    const QosResult sca = solve_qos(ch, cfg, QosMethod::OptSca);
    sandwich = std::max({sandwich, (sdr.lower_bound - sca.power) / sca.power, (sca.power - sdr.power) / sdr.power});
    for (const auto* q : {&sdr, &sca}) {
      const RVec ratio = sinr(q->solution.w, ch, cfg.sigma2).cwiseQuotient(gamma);
      infeasible = std::max(infeasible, 1.0 - ratio.minCoeff());
    }
  }

  const SystemConfig big = SystemConfig::uniform(3, 5, 500);
  const ChannelSet ch_big = gen_normalized_channels(big, ctx.instance(9, 100));
  const LambdaResult lam = fixed_point_lambda(ch_big, big.gamma());
  const ReducedProblem rp_big = build_reduced_problem(ch_big, lam.lambda, big.gamma(), big.sigma2);

  // full-rank blocks so that every draw is genuinely random
  const SystemConfig small = SystemConfig::uniform(3, 5, 16);
  const ChannelSet ch = gen_normalized_channels(small, ctx.instance(9, 200));
  const ReducedProblem rp =
      build_reduced_problem(ch, fixed_point_lambda(ch, small.gamma()).lambda, small.gamma(), small.sigma2);
  std::vector<CMat> x = solve_relaxation(rp.problem).x;
  const CounterRng rng = ctx.rng(8);
  std::uint64_t idx = 0;
  for (auto& xi : x) {
    const CMat m = random_cmat(rng, idx, static_cast<int>(xi.rows()), static_cast<int>(xi.cols()));
    xi += 0.05 * xi.trace().real() / static_cast<double>(xi.rows()) * (m * m.adjoint()) / static_cast<double>(xi.rows());
  }
  const Extraction e1 = randomize_and_scale(rp.problem, x, kDefaultRandomizations, ctx.seed);
  const Extraction e2 = randomize_and_scale(rp.problem, x, kDefaultRandomizations, ctx.seed);
  double diff = e1.rank_one ? 1.0 : std::abs(e1.objective - e2.objective);
  for (std::size_t i = 0; i < e1.x.size(); ++i) diff = std::max(diff, (e1.x[i] - e2.x[i]).cwiseAbs().maxCoeff());

  return {check_at_most("weights.sandwich", sandwich, 1e-6, "lower bound <= OptBFwSCA <= OptBFwSDR, N = 50"),
          check_at_most("weights.feasibility", infeasible, kSinrSlack, "max relative SINR shortfall"),
          check_at_most("weights.dimension", rp_big.problem.total_dim(), big.k_tot(), "reduced size at N = 500"),
          check_at_most("weights.randomization_determinism", diff, 0.0,
                        fmt("%.0f feasible candidates of %.0f draws", e1.feasible_candidates, kDefaultRandomizations))};
}

// ---------------------------------------------------------------- direct-baselines

std::vector<CheckResult> direct_structure(const Ctx& ctx) {
  const SystemConfig cfg = SystemConfig::uniform(3, 5, 200);
  const RVec gamma = cfg.gamma();
  DirectOptions opts;
  opts.span_reduction = true;
  std::vector<double> residuals;
  int failures = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(10, trial));
    try {
      const DirectResult sdr = direct_sdr_qos(ch, gamma, cfg.sigma2, opts);
      const DirectResult sca = direct_sca_qos(ch, gamma, cfg.sigma2, sdr.w, opts);
      const RVec lam = fixed_point_lambda(ch, gamma).lambda;
      residuals.push_back(structure_residual(sca.w, lam, ch, gamma).mean());
    } catch (const Error&) {
      ++failures;
    }
  }
  return {check_at_most("direct.structure_residual", failures ? 1.0 : mean(residuals), 0.1,
                        fmt("mean over 50 instances at N = 200, %.0f failures", failures))};
}

std::vector<CheckResult> direct_sandwich(const Ctx& ctx) {
  const SystemConfig cfg = SystemConfig::uniform(3, 5, 32);
  const RVec gamma = cfg.gamma();
  DirectOptions opts;
  opts.span_reduction = true;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(11, trial));
    const DirectResult d = direct_sdr_qos(ch, gamma, cfg.sigma2, opts);
    const double best = std::min(solve_qos(ch, cfg, QosMethod::OptSdr).power, solve_qos(ch, cfg, QosMethod::OptSca).power);
    worst = std::max({worst, (d.lower_bound - best) / best, (best - d.power) / d.power});
  }
  return {check_at_most("direct.sandwich", worst, 1e-6, "SDR bound <= best structured <= direct SDR, N = 32")};
}

// ---------------------------------------------------------------- mmf-solver

struct MmfRecord {
  double power_excess = 0.0;  // power / P - 1
  double t_error = 0.0;
};

void record(MmfRecord& rec, const MmfResult& r, const ChannelSet& ch, const SystemConfig& cfg) {
  rec.power_excess = std::max(rec.power_excess, r.power / cfg.P - 1.0);
  const double t = min_sinr_ratio(r.w, ch, cfg.gamma(), cfg.sigma2);
  rec.t_error = std::max(rec.t_error, std::abs(t - r.t_star) / t);
}

std::vector<CheckResult> mmf_suite(const Ctx& ctx) {
  MmfRecord rec;
  double round_trip = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(2, 2, 8);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(12, trial));
    const MmfResult r = solve_mmf_bisection(ch, cfg, QosMethod::OptSca);
    record(rec, r, ch, cfg);
    const QosResult q = solve_qos(ch, RVec(r.t_star * cfg.gamma()), cfg.sigma2, QosMethod::OptSca);
    round_trip = std::max(round_trip, std::abs(q.power / cfg.P - 1.0));
  }
  for (int trial = 0; trial < 2; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 5, 32);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(13, trial));
    record(rec, solve_mmf_bisection(ch, cfg, QosMethod::OptSdr), ch, cfg);
    record(rec, asym_mmf_sca(ch, cfg), ch, cfg);
    const BeamformerSet cf = cf_asym_mmf(ch, cfg);
    rec.power_excess = std::max(rec.power_excess, total_power(cf) / cfg.P - 1.0);
  }

  double violation = 0.0;
  for (int trial = 0; trial < 2; ++trial) {
    SystemConfig cfg = SystemConfig::uniform(2, 2, 8);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(14, trial));
    double prev = 0.0;
    for (double p_db : {0.0, 5.0, 10.0, 15.0}) {
      const SystemConfig c = apply_param(cfg, "P_db", p_db);
      const MmfResult r = solve_mmf_bisection(ch, c, QosMethod::OptSca);
      record(rec, r, ch, c);
      violation = std::max(violation, (prev - r.t_star) / r.t_star);
      prev = r.t_star;
    }
    const MmfResult base = solve_mmf_bisection(ch, cfg, QosMethod::OptSca);
    cfg.gamma_db[0] += 3.0;
    const MmfResult raised = solve_mmf_bisection(ch, cfg, QosMethod::OptSca);
    record(rec, raised, ch, cfg);
    violation = std::max(violation, (raised.t_star - base.t_star) / base.t_star);
  }

  double sine = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    const SystemConfig cfg = SystemConfig::uniform(3, 1, 8);
    const ChannelSet ch = gen_normalized_channels(cfg, ctx.instance(15, trial));
    MmfOptions tight;
    tight.tol_t = 1e-9;
    const MmfResult r = solve_mmf_bisection(ch, cfg, QosMethod::OptSdr, tight);
    record(rec, r, ch, cfg);
    const BeamformerSet w = assemble_mmf(r.lambda, r.delta, ch, cfg);
    for (std::size_t i = 0; i < w.size(); ++i) sine = std::max(sine, collinearity_sine(w[i], r.w[i]));
  }

  const MmfOptions defaults;
  return {check_at_most("mmf.round_trip", round_trip, 0.01, "|P_o(t* gamma) / P - 1|, 5 instances"),
          check_at_most("mmf.power_compliance", rec.power_excess, 1e-8, "max total power / P - 1"),
          check_at_most("mmf.t_exact", rec.t_error, 1e-12, "claimed t* vs recomputed minimum ratio"),
          check_at_most("mmf.monotonicity", violation, defaults.tol_t,
                        "relative violation over P and gamma sweeps (bisection tolerance)"),
          check_at_most("mmf.weight_consistency", sine, 1e-6, "collinearity sine, unicast instances")};
}

// ---------------------------------------------------------------- bench-cli

std::vector<CheckResult> bench_suite(const Ctx& ctx) {
  SweepSpec spec;
  spec.base = SystemConfig::uniform(2, 2, 8);
  spec.methods = {"opt-sdr", "opt-sca", "direct-sdr"};
  spec.values = {6, 8};
  spec.trials = 2;
  spec.seed = ctx.seed;
  spec.timing = false;
  spec.workers = 1;
  const std::string first = to_csv(run_qos_sweep(spec));
  spec.workers = 3;
  const std::vector<BenchRow> rows = run_qos_sweep(spec);
  const bool same = first == to_csv(rows);

  const BenchRow& row = rows[3];  // opt-sca, N = 8, trial 1
  const SystemConfig cfg = apply_param(spec.base, row.param_name, row.param_value);
  const ChannelSet ch = gen_channels(cfg, row.seed);
  const QosResult q = solve_qos(ch, cfg, parse_qos_method(row.method), spec.qos);
  double diff = std::abs(10.0 * std::log10(q.power / cfg.sigma2) - row.objective_db);

  SweepSpec mspec = spec;
  mspec.methods = {"qos2mmf-sdr"};
  mspec.values = {8};
  mspec.trials = 1;
  const BenchRow mrow = run_mmf_sweep(mspec).front();
  const ChannelSet mch = gen_channels(cfg, mrow.seed);
  const MmfResult m = solve_mmf_bisection(mch, cfg, QosMethod::OptSdr, mspec.mmf);
  diff = std::max(diff, std::abs(10.0 * std::log10(m.t_star) - mrow.objective_db));

  return {check_at_most("bench.determinism", same ? 0.0 : 1.0, 0.0, "CSV bytes with 1 and 3 workers"),
          check_at_most("bench.cli_api_equivalence", diff, 0.0, "table cell vs direct library call (dB)")};
}

using Suite = std::function<std::vector<CheckResult>(const Ctx&)>;

const std::vector<std::pair<std::vector<std::string>, Suite>>& registry() {
  static const std::vector<std::pair<std::vector<std::string>, Suite>> suites = {
      {{"numerics.lift_roundtrip"}, numerics_lift},
      {{"numerics.sdp_weak_duality"}, numerics_sdp_duality},
      {{"numerics.qcqp_monotone"}, numerics_qcqp_monotone},
      {{"numerics.range_idempotence"}, numerics_range},
      {{"scenario.reproducibility"}, scenario_reproducibility},
      {{"scenario.independence"}, scenario_independence},
      {{"qos.form_equivalence"}, qos_form_equivalence},
      {{"qos.scale_covariance"}, qos_scale_covariance},
      {{"qos.R_eigen_floor"}, qos_eigen_floor},
      {{"qos.unicast_sdr_gap", "qos.unicast_slack", "qos.power_identity", "qos.duality_check",
        "qos.duality_scale_invariance"},
       qos_unicast},
      {{"qos.structure_residual"}, qos_structure},
      {{"qos.weight_relation"}, qos_weight_relation},
      {{"lambda.positivity", "lambda.certificate"}, lambda_positivity_certificate},
      {{"lambda.prop2_decay", "lambda.prop2_level"}, lambda_prop2},
      {{"lambda.prop3_concentration"}, lambda_prop3},
      {{"weights.sandwich", "weights.feasibility", "weights.dimension", "weights.randomization_determinism"},
       weights_suite},
      {{"direct.structure_residual"}, direct_structure},
      {{"direct.sandwich"}, direct_sandwich},
      {{"mmf.round_trip", "mmf.power_compliance", "mmf.t_exact", "mmf.monotonicity", "mmf.weight_consistency"},
       mmf_suite},
      {{"bench.determinism", "bench.cli_api_equivalence"}, bench_suite},
  };
  return suites;
}

bool selected(const std::vector<std::string>& names, const std::vector<std::string>& only) {
  if (only.empty()) return true;
  for (const auto& n : names) {
    for (const auto& p : only) {
      if (n.rfind(p, 0) == 0) return true;
    }
  }
  return false;
}

}  // namespace

CheckResult check_at_most(std::string name, double value, double limit, std::string detail) {
  return CheckResult{std::move(name), value <= limit, value, limit, true, std::move(detail)};
}

CheckResult check_at_least(std::string name, double value, double limit, std::string detail) {
  return CheckResult{std::move(name), value >= limit, value, limit, false, std::move(detail)};
}

bool ValidateReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

std::string ValidateReport::format() const {
  std::ostringstream out;
  char buf[512];
  for (const auto& c : checks) {
    std::snprintf(buf, sizeof buf, "%s %-34s value %-11.4g %s %-9.3g margin %-11.4g %s\n", c.pass ? "PASS" : "FAIL",
                  c.name.c_str(), c.value, c.upper ? "<=" : ">=", c.limit, c.margin(), c.detail.c_str());
    out << buf;
  }
  const auto failed = std::count_if(checks.begin(), checks.end(), [](const CheckResult& c) { return !c.pass; });
  out << checks.size() - static_cast<std::size_t>(failed) << " passed, " << failed << " failed\n";
  return out.str();
}

std::string ValidateReport::to_json() const {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& c : checks) {
    j.push_back({{"name", c.name},
                 {"pass", c.pass},
                 {"value", c.value},
                 {"limit", c.limit},
                 {"relation", c.upper ? "<=" : ">="},
                 {"margin", c.margin()},
                 {"detail", c.detail}});
  }
  return j.dump(2);
}

std::vector<std::string> validate_check_names() {
  std::vector<std::string> names;
  for (const auto& [n, suite] : registry()) names.insert(names.end(), n.begin(), n.end());
  return names;
}

ValidateReport validate(const ValidateOptions& options) {
  const Ctx ctx{options.seed, options.corrupt};
  ValidateReport report;
  for (const auto& [names, suite] : registry()) {
    if (!selected(names, options.only)) continue;
    try {
      for (auto& c : suite(ctx)) report.checks.push_back(std::move(c));
    } catch (const std::exception& e) {
      for (const auto& n : names) {
        CheckResult c{n, false, std::numeric_limits<double>::quiet_NaN(), 0.0, true, std::string("error: ") + e.what()};
        report.checks.push_back(std::move(c));
      }
    }
  }
  return report;
}

}  // namespace mcbf
