// SPDX-License-Identifier: Apache-2.0
#include "mcbf/direct.hpp"

#include <chrono>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

void check_cap(const ChannelSet& ch, const DirectOptions& options) {
  if (!options.span_reduction && ch.antennas() > options.max_antennas) {
    throw Error(ErrorCode::InvalidArgument, "N = " + std::to_string(ch.antennas()) +
                                                " exceeds the direct-baseline cap of " +
                                                std::to_string(options.max_antennas));
  }
}

BeamformerSet to_full(const std::vector<CVec>& x, const CMat* basis) {
  if (!basis) return x;
  BeamformerSet w;
  for (const auto& xi : x) w.emplace_back(*basis * xi);
  return w;
}

}  // namespace

MulticastProblem direct_problem(const ChannelSet& ch, const RVec& gamma, double sigma2, const CMat* basis) {
  MulticastProblem p;
  const CMat s = ch.stacked();
  const CMat f = basis ? CMat(basis->adjoint() * s) : s;
  const Eigen::Index d = f.rows();
  for (int i = 0; i < ch.groups(); ++i) {
    p.gram.push_back(CMat::Identity(d, d));
    p.cross.push_back(f);
    p.users.push_back(ch.users(i));
  }
  p.gamma = gamma;
  p.sigma2 = sigma2;
  p.validate();
  return p;
}

DirectResult direct_sdr_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, const DirectOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_cap(ch, options);
  CMat basis;
  if (options.span_reduction) basis = orthonormal_range(ch.stacked()).u;
  const CMat* bp = options.span_reduction ? &basis : nullptr;
  const MulticastProblem p = direct_problem(ch, gamma, sigma2, bp);
  const Relaxation relax = solve_relaxation(p);
  const Extraction ext = randomize_and_scale(p, relax.x, options.n_rand, options.seed);
  DirectResult out;
  out.w = to_full(ext.x, bp);
  out.power = total_power(out.w);
  out.lower_bound = relax.lower_bound;
  out.report.status = SolverStatus::Optimal;
  out.report.iterations = relax.report.iterations;
  out.report.gap = relax.report.gap;
  out.report.objective = out.power;
  out.report.residual = p.violation(ext.x);
  out.report.trajectory = {out.power};
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

DirectResult direct_sca_qos(const ChannelSet& ch, const RVec& gamma, double sigma2, const BeamformerSet& z0,
                            const DirectOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  check_cap(ch, options);
  CMat basis;
  if (options.span_reduction) basis = orthonormal_range(ch.stacked()).u;
  const CMat* bp = options.span_reduction ? &basis : nullptr;
  const MulticastProblem p = direct_problem(ch, gamma, sigma2, bp);
  std::vector<CVec> x0;
  for (const auto& zi : z0) x0.emplace_back(bp ? CVec(basis.adjoint() * zi) : zi);
  ScaOptions opt;
  opt.form = ScaForm::OwnSignal;
  opt.tol = options.sca_tol;
  ScaResult res = solve_sca(p, x0, opt);
  DirectResult out;
  out.w = to_full(res.x, bp);
  out.power = total_power(out.w);
  out.report = std::move(res.report);
  out.report.objective = out.power;
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace mcbf
