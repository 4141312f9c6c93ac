// SPDX-License-Identifier: Apache-2.0
#include "mcbf/mmf.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <optional>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

std::size_t ix(int k) { return static_cast<std::size_t>(k); }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

struct Candidate {
  BeamformerSet w;
  double power = 0.0;
  RVec lambda;
  std::vector<CVec> delta;
};

using Evaluate = std::function<std::optional<Candidate>(double)>;

bool is_solver_failure(ErrorCode code) {
  return code == ErrorCode::Infeasible || code == ErrorCode::RandomizationFailed ||
         code == ErrorCode::IterLimit || code == ErrorCode::NumericalFailure ||
         code == ErrorCode::InfeasibleStart || code == ErrorCode::NotPositiveDefinite;
}

double initial_upper_t(const ChannelSet& ch, const SystemConfig& cfg) {
  const RVec gamma = cfg.gamma();
  return cfg.P * ch.beta_flat().maxCoeff() * cfg.N / (cfg.sigma2 * gamma.minCoeff());
}

MmfResult bisect(const Evaluate& eval, const ChannelSet& ch, const SystemConfig& cfg, double tol_t, int max_steps,
                 std::chrono::steady_clock::time_point start) {
  MmfResult out;
  std::optional<Candidate> best;
  double lo = 0.0;
  double hi = initial_upper_t(ch, cfg);
  bool done = false;
  auto close_enough = [&](const Candidate& c) { return std::abs(c.power - cfg.P) <= tol_t * cfg.P; };

  for (int k = 0; k < 60 && !done; ++k) {
    auto c = eval(hi);
    out.report.trajectory.push_back(hi);
    if (!c || c->power > cfg.P) {
      if (c && close_enough(*c)) {
        best = std::move(c);
        out.t_qos = hi;
        done = true;
      }
      break;
    }
    lo = hi;
    best = std::move(c);
    out.t_qos = hi;
    if (close_enough(*best)) done = true;
    hi *= 2.0;
  }
  for (int step = 0; step < max_steps && !done; ++step) {
    const double t = 0.5 * (lo + hi);
    auto c = eval(t);
    out.report.trajectory.push_back(t);
    if (c && close_enough(*c)) {
      best = std::move(c);
      out.t_qos = t;
      break;
    }
    if (c && c->power <= cfg.P) {
      lo = t;
      best = std::move(c);
      out.t_qos = t;
    } else {
      hi = t;
    }
    if (hi - lo <= 1e-12 * hi) break;
  }
  if (!best) throw Error(ErrorCode::NumericalFailure, "bisection found no feasible operating point");

  const double scale = std::sqrt(cfg.P / best->power);
  for (auto& wi : best->w) wi *= scale;
  out.w = std::move(best->w);
  out.power = total_power(out.w);
  out.t_star = min_sinr_ratio(out.w, ch, cfg.gamma(), cfg.sigma2);
  out.lambda = std::move(best->lambda);
  out.delta = std::move(best->delta);
  out.report.status = SolverStatus::Optimal;
  out.report.iterations = static_cast<int>(out.report.trajectory.size());
  out.report.objective = out.t_star;
  out.report.gap = hi > 0.0 ? (hi - lo) / hi : 0.0;
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace

const char* to_string(MmfMethod method) noexcept {
  switch (method) {
    case MmfMethod::QosSdr: return "qos2mmf-sdr";
    case MmfMethod::QosSca: return "qos2mmf-sca";
    case MmfMethod::AsymSca: return "asym-sca";
    case MmfMethod::CfAsym: return "cf-asym";
    case MmfMethod::UpperBound: return "upper-bound";
  }
  return "?";
}

MmfMethod parse_mmf_method(const std::string& name) {
  if (name == "qos2mmf-sdr") return MmfMethod::QosSdr;
  if (name == "qos2mmf-sca") return MmfMethod::QosSca;
  if (name == "asym-sca") return MmfMethod::AsymSca;
  if (name == "cf-asym") return MmfMethod::CfAsym;
  if (name == "upper-bound") return MmfMethod::UpperBound;
  throw Error(ErrorCode::InvalidArgument, "unknown MMF method '" + name + "'");
}

MmfResult solve_mmf_bisection(const ChannelSet& ch, const SystemConfig& cfg, QosMethod qos_method,
                              const MmfOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  ch.check(cfg);
  const RVec gamma = cfg.gamma();
  QosOptions qos = options.qos;
  Evaluate eval = [&](double t) -> std::optional<Candidate> {
    try {
      QosResult r = solve_qos(ch, RVec(t * gamma), cfg.sigma2, qos_method, qos);
      if (qos_method != QosMethod::AsymSca) qos.lambda.init = r.solution.lambda;
      return Candidate{std::move(r.solution.w), r.power, std::move(r.solution.lambda),
                       std::move(r.solution.weights.delta)};
    } catch (const Error& e) {
      if (!is_solver_failure(e.code())) throw;
      return std::nullopt;
    }
  };
  return bisect(eval, ch, cfg, options.tol_t, options.max_steps, start);
}

double mmf_optimal_value(const RVec& lambda_qos, const RVec& gamma, double sigma2, double P) {
  return P / (sigma2 * lambda_qos.dot(gamma));
}

BeamformerSet assemble_mmf(const RVec& lambda_qos, const std::vector<CVec>& delta, const ChannelSet& ch,
                           const SystemConfig& cfg) {
  const RVec gamma = cfg.gamma();
  const double lg = lambda_qos.dot(gamma);
  if (!(lg > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda^T gamma must be positive");
  // R~ equals R(lambda) evaluated at targets t gamma with t = P / (sigma2 lambda^T gamma)
  const double t = cfg.P / (cfg.sigma2 * lg);
  const RVec scaled = t * gamma;
  std::vector<CVec> a;
  int off = 0;
  for (int i = 0; i < ch.groups(); ++i) {
    const int k_i = ch.users(i);
    const RVec coef = lambda_qos.segment(off, k_i).cwiseProduct((scaled.segment(off, k_i).array() + 1.0).matrix());
    a.emplace_back(coef.cast<cdouble>().cwiseProduct(delta[ix(i)]));
    off += k_i;
  }
  return assemble_beamformer(lambda_qos, a, ch, scaled);
}

double harmonic_mean(const RVec& beta) {
  return static_cast<double>(beta.size()) / beta.cwiseInverse().sum();
}

namespace {

// lambda_u gamma_u = P beta_h / (sigma2 K_tot beta_u) reproduces R~inf through build_R.
RVec asymptotic_mmf_loading(const ChannelSet& ch, const SystemConfig& cfg) {
  const RVec beta = ch.beta_flat();
  const double scale = cfg.P * harmonic_mean(beta) / (cfg.sigma2 * static_cast<double>(ch.k_tot()));
  return scale * beta.cwiseInverse();
}

}  // namespace

CMat asymptotic_mmf_R(const ChannelSet& ch, const SystemConfig& cfg) {
  common_target(cfg.gamma());
  const RVec beta = ch.beta_flat();
  const double scale = cfg.P * harmonic_mean(beta) / (cfg.sigma2 * static_cast<double>(ch.k_tot()));
  const CMat g = ch.stacked() * beta.cwiseSqrt().cwiseInverse().cast<cdouble>().asDiagonal();
  CMat r = scale * g * g.adjoint();
  r.diagonal().array() += 1.0;
  return 0.5 * (r + r.adjoint());
}

MmfResult asym_mmf_sca(const ChannelSet& ch, const SystemConfig& cfg, const MmfOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  cfg.validate();
  ch.check(cfg);
  const RVec gamma = cfg.gamma();
  common_target(gamma);
  const RVec lambda = asymptotic_mmf_loading(ch, cfg).cwiseQuotient(gamma);
  ReducedProblem rp = build_reduced_problem(ch, lambda, gamma, cfg.sigma2, options.qos.basis_reduction);
  Evaluate eval = [&](double t) -> std::optional<Candidate> {
    try {
      rp.problem.gamma = t * gamma;
      WeightSolution ws = solve_weights_sdr(rp, options.qos.n_rand, options.qos.seed);
      ws = solve_weights_sca(rp, ws.b, options.qos.sca_tol);
      BeamformerSet w = rp.beamformers(ws.b);
      const double p = total_power(w);
      return Candidate{w, p, lambda, group_delta(w, ch)};
    } catch (const Error& e) {
      if (!is_solver_failure(e.code())) throw;
      return std::nullopt;
    }
  };
  return bisect(eval, ch, cfg, options.tol_t, options.max_steps, start);
}

BeamformerSet cf_asym_mmf(const ChannelSet& ch, const SystemConfig& cfg) {
  cfg.validate();
  ch.check(cfg);
  const CMat r = asymptotic_mmf_R(ch, cfg);
  const double beta_h = harmonic_mean(ch.beta_flat());
  const HermitianFactor factor(r);
  BeamformerSet w;
  for (int i = 0; i < ch.groups(); ++i) {
    const RVec& beta_i = ch.beta[ix(i)];
    const CVec v = factor.solve(CVec(ch.H[ix(i)] * beta_i.cwiseInverse().cast<cdouble>()));
    const double group_power = ch.users(i) * beta_h * cfg.P / (ch.k_tot() * harmonic_mean(beta_i));
    w.emplace_back(v * std::sqrt(group_power / v.squaredNorm()));
  }
  return w;
}

double mmf_upper_bound(const ChannelSet& ch, const SystemConfig& cfg, double tol_t) {
  cfg.validate();
  ch.check(cfg);
  const RVec gamma = cfg.gamma();
  const CMat basis = orthonormal_range(ch.stacked()).u;
  MulticastProblem p = direct_problem(ch, gamma, cfg.sigma2, &basis);
  // true when the relaxation at t certifies power above P
  auto above = [&](double t) {
    p.gamma = t * gamma;
    try {
      return solve_relaxation(p).lower_bound > cfg.P;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Infeasible) return true;
      if (!is_solver_failure(e.code())) throw;
      return false;  // undecided points never shrink the bracket from above
    }
  };
  double lo = 0.0;
  double hi = initial_upper_t(ch, cfg);
  for (int k = 0; k < 60 && !above(hi); ++k) {
    lo = hi;
    hi *= 2.0;
  }
  while (hi - lo > tol_t * hi) {
    const double t = 0.5 * (lo + hi);
    if (above(t)) {
      hi = t;
    } else {
      lo = t;
    }
  }
  return hi;
}

}  // namespace mcbf
