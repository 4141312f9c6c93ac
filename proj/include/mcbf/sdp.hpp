// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "mcbf/linalg.hpp"
#include "mcbf/report.hpp"

namespace mcbf {

/// Hermitian matrix held as sum_r weight_r * v_r v_r^H.
struct LowRankHermitian {
  CMat vectors;  // d x r
  RVec weights;  // r

  static LowRankHermitian rank_one(const CVec& v, double weight);
  /// Eigen-decomposes a dense Hermitian matrix, dropping null directions.
  static LowRankHermitian from_dense(const CMat& a, double tol = 1e-14);
  CMat dense() const;
  double trace_with(const CMat& x) const;  // Re tr(A X)
};

struct SdpTerm {
  int block = 0;
  LowRankHermitian coef;
};

/// sum_b tr(A_b X_b) >= rhs
struct SdpConstraint {
  std::vector<SdpTerm> terms;
  double rhs = 0.0;
};

/// min sum_b tr(C_b X_b)  s.t. constraints, X_b Hermitian PSD.
struct SdpProblem {
  std::vector<CMat> objective;  // C_b, one per block; sizes define blocks
  std::vector<SdpConstraint> constraints;

  int block_count() const { return static_cast<int>(objective.size()); }
  void validate() const;
};

struct SdpOptions {
  double tol = 1e-7;
  int max_iter = 100;
  double step_fraction = 0.98;
};

struct SdpIterate {
  double primal_objective;
  double dual_objective;
  double primal_infeasibility;  // relative
  double dual_infeasibility;    // relative
};

struct SdpResult {
  std::vector<CMat> x;
  RVec dual;  // one multiplier per constraint, >= 0
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  SolverReport report;  // gap = relative primal-dual gap
  std::vector<SdpIterate> trace;
};

/// Infeasible-start primal-dual path-following method with the HKM direction
/// and Mehrotra predictor-corrector steps. Reports Infeasible when the dual
/// iterates trace an unbounded ray (Farkas certificate).
SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& options = {});

}  // namespace mcbf
