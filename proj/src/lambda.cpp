// SPDX-License-Identifier: Apache-2.0
#include "mcbf/lambda.hpp"

#include <chrono>
#include <cmath>

#include "mcbf/error.hpp"
#include "mcbf/qos.hpp"

namespace mcbf {

namespace {

// diag(S^H R^{-1} S) for R = I + S D S^H, evaluated in K_tot dimensions:
// S^H R^{-1} S = Gram - Gram D^{1/2} (I + D^{1/2} Gram D^{1/2})^{-1} D^{1/2} Gram.
RVec quadratic_terms(const CMat& gram, const RVec& d) {
  const Eigen::Index k = gram.rows();
  const RVec sd = d.cwiseSqrt();
  CMat t = sd.cast<cdouble>().asDiagonal() * gram * sd.cast<cdouble>().asDiagonal();
  t.diagonal().array() += 1.0;
  const CMat x = sd.cast<cdouble>().asDiagonal() * gram;  // D^{1/2} Gram
  const CMat y = HermitianFactor(0.5 * (t + t.adjoint())).solve(x);
  RVec q(k);
  for (Eigen::Index u = 0; u < k; ++u) {
    q(u) = std::real(gram(u, u)) - std::real(x.col(u).dot(y.col(u)));
  }
  return q;
}

}  // namespace

double common_target(const RVec& gamma) {
  if (gamma.size() == 0) throw Error(ErrorCode::InvalidArgument, "no targets");
  const double g = gamma(0);
  for (Eigen::Index u = 1; u < gamma.size(); ++u) {
    if (std::abs(gamma(u) - g) > 1e-12 * std::abs(g)) {
      throw Error(ErrorCode::UnequalTargets, "this method requires equal SINR targets");
    }
  }
  return g;
}

LambdaResult fixed_point_lambda(const ChannelSet& ch, const RVec& gamma, const LambdaOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  const int kt = ch.k_tot();
  if (gamma.size() != kt) throw Error(ErrorCode::DimensionMismatch, "gamma needs one entry per user");
  if (gamma.minCoeff() <= 0.0) throw Error(ErrorCode::InvalidArgument, "targets must be positive");
  if (!(options.damping > 0.0 && options.damping <= 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "damping must lie in (0, 1]");
  }
  const CMat s = ch.stacked();
  const CMat gram = s.adjoint() * s;

  LambdaResult out;
  if (options.init) {
    if (options.init->size() != kt || options.init->minCoeff() <= 0.0) {
      throw Error(ErrorCode::InvalidArgument, "initial lambda must be positive with one entry per user");
    }
    out.lambda = *options.init;
  } else {
    out.lambda = (ch.beta_flat() * static_cast<double>(ch.antennas())).cwiseInverse();
  }
  const RVec one_plus = gamma.array() + 1.0;
  out.report.status = SolverStatus::IterLimit;
  for (int it = 0;; ++it) {
    const RVec q = quadratic_terms(gram, out.lambda.cwiseProduct(gamma));
    const double residual = (out.lambda.cwiseProduct(one_plus).cwiseProduct(q).array() - 1.0).abs().maxCoeff();
    out.report.trajectory.push_back(residual);
    out.report.residual = residual;
    out.report.iterations = it;
    if (!std::isfinite(residual)) {
      out.report.status = SolverStatus::NumericalFailure;
      break;
    }
    if (residual <= options.tol) {
      out.report.status = SolverStatus::Optimal;
      break;
    }
    if (it >= options.max_iter) break;
    const RVec update = one_plus.cwiseProduct(q).cwiseInverse();
    out.lambda = options.damping * update + (1.0 - options.damping) * out.lambda;
  }
  out.report.objective = out.lambda.dot(gamma);
  out.report.gap = out.report.residual;
  out.report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

double lambda_residual(const RVec& lambda, const ChannelSet& ch, const RVec& gamma) {
  const CMat s = ch.stacked();
  const CMat rinv_s = hermitian_solve(build_R(lambda, ch, gamma), s);
  double worst = 0.0;
  for (Eigen::Index u = 0; u < s.cols(); ++u) {
    const double q = std::real(s.col(u).dot(rinv_s.col(u)));
    worst = std::max(worst, std::abs(lambda(u) * (1.0 + gamma(u)) * q - 1.0));
  }
  return worst;
}

RVec asymptotic_lambda(const RVec& beta, const RVec& gamma, int antennas) {
  if (beta.size() != gamma.size()) throw Error(ErrorCode::DimensionMismatch, "beta and gamma lengths differ");
  const double total = gamma.sum();
  RVec lambda(beta.size());
  for (Eigen::Index u = 0; u < beta.size(); ++u) {
    const double denom = static_cast<double>(antennas) - (total - gamma(u));
    if (!(denom > 0.0)) {
      throw Error(ErrorCode::TooFewAntennas, "N must exceed the sum of the other users' targets");
    }
    lambda(u) = 1.0 / (beta(u) * denom);
  }
  return lambda;
}

CMat asymptotic_R(const ChannelSet& ch, const RVec& gamma, int antennas) {
  const double g = common_target(gamma);
  const int kt = ch.k_tot();
  const double denom = static_cast<double>(antennas) / g - static_cast<double>(kt - 1);
  if (!(denom > 0.0)) throw Error(ErrorCode::TooFewAntennas, "N must exceed (K_tot - 1) gamma");
  const CMat gmat = ch.stacked() * ch.beta_flat().cwiseSqrt().cwiseInverse().cast<cdouble>().asDiagonal();
  CMat r = gmat * gmat.adjoint() / denom;
  r.diagonal().array() += 1.0;
  return 0.5 * (r + r.adjoint());
}

}  // namespace mcbf
