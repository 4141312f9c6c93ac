// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <vector>

#include "mcbf/linalg.hpp"
#include "mcbf/report.hpp"

namespace mcbf {

/// x^T Q x + 2 q^T x + c <= 0 with Q positive semidefinite. Q may be given
/// densely (q_mat) or as a factor Q = F F^T (factor, q_mat left empty).
struct QuadraticConstraint {
  RMat q_mat;
  RVec q_vec;
  double c = 0.0;
  RMat factor;

  bool factored() const { return factor.size() > 0 || q_mat.size() == 0; }
  double value(const RVec& x) const;
  RVec quad_times(const RVec& x) const;  // Q x
};

/// min x^T Q0 x + 2 q0^T x  s.t. every constraint <= 0. Real dimension is
/// even because instances come from complex variables lifted to [Re; Im].
struct ConvexQcqp {
  RMat q0_mat;
  RVec q0_vec;
  std::vector<QuadraticConstraint> constraints;

  Eigen::Index dim() const { return q0_vec.size(); }
  double objective(const RVec& x) const;
  double max_violation(const RVec& x) const;

  /// Checks shapes, even dimension and PSD-ness of every quadratic term.
  /// Throws Error(InvalidArgument / DimensionMismatch).
  void validate() const;
};

struct QcqpOptions {
  double tol = 1e-8;          // duality-measure stop, relative to max(1, |f0|)
  double mu = 10.0;           // barrier parameter growth
  int max_newton = 60;        // per centering step
  int max_outer = 60;
  bool require_even_dim = true;
};

struct QcqpResult {
  RVec x;
  SolverReport report;  // trajectory: objective after each centering step
  int phase1_iterations = 0;
};

/// Log-barrier method with damped Newton steps. If x0 is absent or not
/// strictly feasible, a single-slack phase-I problem is solved first.
QcqpResult solve_convex_qcqp(const ConvexQcqp& problem, const std::optional<RVec>& x0,
                             const QcqpOptions& options = {});

}  // namespace mcbf
