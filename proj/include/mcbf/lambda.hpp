// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>

#include "mcbf/linalg.hpp"
#include "mcbf/report.hpp"
#include "mcbf/scenario.hpp"

namespace mcbf {

struct LambdaOptions {
  double tol = 1e-9;
  int max_iter = 500;
  double damping = 1.0;       // lambda <- d * update + (1 - d) * lambda, d in (0, 1]
  std::optional<RVec> init;   // default 1 / (beta N)
};

struct LambdaResult {
  RVec lambda;
  SolverReport report;  // residual trajectory; report.residual is the residual of lambda
};

/// Jacobi iteration lambda_ik <- 1 / ((1 + gamma_ik) h_ik^H R^{-1}(lambda) h_ik).
/// Status IterLimit when the residual target is not reached.
LambdaResult fixed_point_lambda(const ChannelSet& ch, const RVec& gamma, const LambdaOptions& options = {});

/// max_ik |lambda_ik (1 + gamma_ik) h_ik^H R^{-1}(lambda) h_ik - 1|
double lambda_residual(const RVec& lambda, const ChannelSet& ch, const RVec& gamma);

/// lambda_ik = 1 / (beta_ik (N - sum_{jl != ik} gamma_jl)). Throws TooFewAntennas.
RVec asymptotic_lambda(const RVec& beta, const RVec& gamma, int antennas);

/// I + (N / gamma - (K_tot - 1))^{-1} sum g_ik g_ik^H for equal targets.
/// Throws UnequalTargets or TooFewAntennas.
CMat asymptotic_R(const ChannelSet& ch, const RVec& gamma, int antennas);

/// Common target when all entries agree to 1e-12 relative; throws UnequalTargets otherwise.
double common_target(const RVec& gamma);

}  // namespace mcbf
