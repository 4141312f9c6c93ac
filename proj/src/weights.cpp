// SPDX-License-Identifier: Apache-2.0
#include "mcbf/weights.hpp"

#include <chrono>
#include <cmath>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

std::size_t ix(int k) { return static_cast<std::size_t>(k); }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::vector<CVec> apply_maps(const std::vector<CMat>& maps, const std::vector<CVec>& v) {
  std::vector<CVec> out;
  for (std::size_t i = 0; i < maps.size(); ++i) out.emplace_back(maps[i] * v[i]);
  return out;
}

}  // namespace

std::vector<CVec> ReducedProblem::weights_to_a(const std::vector<CVec>& b) const { return apply_maps(to_a, b); }

std::vector<CVec> ReducedProblem::a_to_weights(const std::vector<CVec>& a) const { return apply_maps(from_a, a); }

BeamformerSet ReducedProblem::beamformers(const std::vector<CVec>& b) const { return apply_maps(gmat, b); }

ReducedProblem build_reduced_problem(const ChannelSet& ch, const RVec& lambda, const RVec& gamma, double sigma2,
                                     std::optional<bool> use_basis_reduction) {
  const int g = ch.groups();
  int k_max = 0;
  for (int i = 0; i < g; ++i) k_max = std::max(k_max, ch.users(i));
  const bool reduce = use_basis_reduction.value_or(ch.antennas() > k_max);

  const HermitianFactor r(build_R(lambda, ch, gamma));
  const CMat s = ch.stacked();
  ReducedProblem rp;
  rp.basis_reduced = reduce;
  rp.problem.gamma = gamma;
  rp.problem.sigma2 = sigma2;
  for (int i = 0; i < g; ++i) {
    const CMat& h = ch.H[ix(i)];
    const int k_i = ch.users(i);
    rp.problem.users.push_back(k_i);
    if (reduce) {
      const CMat u = orthonormal_range(h).u;
      rp.gmat.push_back(r.solve(u));
      rp.to_a.push_back(h.completeOrthogonalDecomposition().solve(u));
      rp.from_a.push_back(u.adjoint() * h);
    } else {
      rp.gmat.push_back(r.solve(h));
      rp.to_a.push_back(CMat::Identity(k_i, k_i));
      rp.from_a.push_back(CMat::Identity(k_i, k_i));
    }
    const CMat& gi = rp.gmat.back();
    const CMat gram = gi.adjoint() * gi;
    rp.problem.gram.push_back(0.5 * (gram + gram.adjoint()));
    rp.problem.cross.push_back(gi.adjoint() * s);
  }
  rp.problem.validate();
  return rp;
}

WeightSolution solve_weights_sdr(const ReducedProblem& rp, int n_rand, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const Relaxation relax = solve_relaxation(rp.problem);
  const Extraction ext = randomize_and_scale(rp.problem, relax.x, n_rand, seed);
  WeightSolution out;
  out.b = ext.x;
  out.a = rp.weights_to_a(out.b);
  out.lower_bound = relax.lower_bound;
  out.rank_one = ext.rank_one;
  out.report.status = SolverStatus::Optimal;
  out.report.iterations = relax.report.iterations;
  out.report.objective = ext.objective;
  out.report.gap = relax.report.gap;
  out.report.residual = rp.problem.violation(out.b);
  out.report.trajectory = {ext.objective};
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

WeightSolution solve_weights_sca(const ReducedProblem& rp, const std::vector<CVec>& v0, double tol) {
  const auto start = std::chrono::steady_clock::now();
  ScaOptions opt;
  opt.form = ScaForm::Weight;
  opt.tol = tol;
  ScaResult res = solve_sca(rp.problem, v0, opt);
  WeightSolution out;
  out.b = std::move(res.x);
  out.a = rp.weights_to_a(out.b);
  out.report = std::move(res.report);
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

const char* to_string(QosMethod method) noexcept {
  switch (method) {
    case QosMethod::OptSdr: return "opt-sdr";
    case QosMethod::OptSca: return "opt-sca";
    case QosMethod::AsymSca: return "asym-sca";
  }
  return "?";
}

QosMethod parse_qos_method(const std::string& name) {
  if (name == "opt-sdr") return QosMethod::OptSdr;
  if (name == "opt-sca") return QosMethod::OptSca;
  if (name == "asym-sca") return QosMethod::AsymSca;
  throw Error(ErrorCode::InvalidArgument, "unknown QoS method '" + name + "'");
}

QosResult solve_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, QosMethod method,
                    const QosOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  QosResult out;
  RVec lambda;
  if (method == QosMethod::AsymSca) {
    lambda = asymptotic_lambda(ch.beta_flat(), gamma, ch.antennas());
  } else {
    lambda = fixed_point_lambda(ch, gamma, options.lambda).lambda;
  }
  out.lambda_ms = elapsed_ms(start);

  const auto weights_start = std::chrono::steady_clock::now();
  const ReducedProblem rp = build_reduced_problem(ch, lambda, gamma, sigma2, options.basis_reduction);
  WeightSolution ws = solve_weights_sdr(rp, options.n_rand, options.seed);
  out.lower_bound = ws.lower_bound;
  out.report = ws.report;
  if (method != QosMethod::OptSdr) {
    ws = solve_weights_sca(rp, ws.b, options.sca_tol);
    out.report = ws.report;
  }
  out.weights_ms = elapsed_ms(weights_start);

  std::vector<CVec> a = ws.a;
  normalize_phase(a);
  auto& sol = out.solution;
  sol.lambda = lambda;
  sol.w = assemble_beamformer(lambda, a, ch, gamma);
  sol.weights.a = a;
  sol.weights.delta = group_delta(sol.w, ch);
  int off = 0;
  for (int i = 0; i < ch.groups(); ++i) {
    const int k_i = ch.users(i);
    sol.weights.alpha.emplace_back(a[ix(i)].cwiseQuotient((gamma.segment(off, k_i).array() + 1.0).matrix().cast<cdouble>()));
    off += k_i;
  }
  sol.consistent = weight_relation_residual(lambda, a, sol.w, ch, gamma) <= 1e-8;

  out.power = total_power(sol.w);
  out.report.objective = out.power;
  out.report.residual = std::max(0.0, 1.0 - min_sinr_ratio(sol.w, ch, gamma, sigma2));
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

QosResult solve_qos(const ChannelSet& ch, const SystemConfig& cfg, QosMethod method, const QosOptions& options) {
  ch.check(cfg);
  return solve_qos(ch, cfg.gamma(), cfg.sigma2, method, options);
}

}  // namespace mcbf
