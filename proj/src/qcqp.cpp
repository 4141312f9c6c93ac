// SPDX-License-Identifier: Apache-2.0
#include "mcbf/qcqp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>

#include "mcbf/error.hpp"

namespace mcbf {

double QuadraticConstraint::value(const RVec& x) const {
  double quad = 0.0;
  if (!factored()) {
    quad = x.dot(q_mat * x);
  } else if (factor.size() > 0) {
    quad = (factor.transpose() * x).squaredNorm();
  }
  return quad + 2.0 * q_vec.dot(x) + c;
}

RVec QuadraticConstraint::quad_times(const RVec& x) const {
  if (!factored()) return q_mat * x;
  if (factor.size() == 0) return RVec::Zero(x.size());
  return factor * (factor.transpose() * x);
}

double ConvexQcqp::objective(const RVec& x) const {
  return x.dot(q0_mat * x) + 2.0 * q0_vec.dot(x);
}

double ConvexQcqp::max_violation(const RVec& x) const {
  double worst = 0.0;
  for (const auto& con : constraints) worst = std::max(worst, con.value(x));
  return worst;
}

namespace {

bool is_psd(const RMat& q) {
  if (q.size() == 0) return true;
  const double scale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) return false;
  // info() flags semidefinite input as a numerical issue, so only the pivots are inspected
  Eigen::LDLT<RMat> ldlt(q);
  return ldlt.vectorD().minCoeff() >= -1e-10 * scale;
}

struct BarrierOutcome {
  RVec x;
  SolverStatus status = SolverStatus::IterLimit;
  int newton_steps = 0;
  double gap = 0.0;
  bool stopped_early = false;
  std::vector<double> trajectory;
};

using EarlyStop = std::function<bool(const RVec&)>;

// Barrier iterations from a strictly feasible start.
BarrierOutcome run_barrier(const ConvexQcqp& p, RVec x, const QcqpOptions& opt,
                           const EarlyStop& early_stop) {
  BarrierOutcome out;
  const Eigen::Index n = p.dim();
  const auto m = static_cast<double>(p.constraints.size());

  if (p.constraints.empty()) {
    Eigen::LDLT<RMat> ldlt(p.q0_mat);
    out.x = ldlt.solve(-p.q0_vec);
    out.status = (ldlt.info() == Eigen::Success && out.x.allFinite()) ? SolverStatus::Optimal
                                                                       : SolverStatus::NumericalFailure;
    out.trajectory.push_back(p.objective(out.x));
    return out;
  }

  std::vector<double> f(p.constraints.size());
  auto eval_constraints = [&](const RVec& z) {
    bool interior = true;
    for (std::size_t k = 0; k < p.constraints.size(); ++k) {
      f[k] = p.constraints[k].value(z);
      if (!(f[k] < 0.0)) interior = false;
    }
    return interior;
  };
  auto barrier_value = [&](const RVec& z, double t) {
    double phi = t * p.objective(z);
    for (const auto& con : p.constraints) {
      const double v = con.value(z);
      if (!(v < 0.0)) return std::numeric_limits<double>::infinity();
      phi -= std::log(-v);
    }
    return phi;
  };

  double t = m / std::max(1.0, std::abs(p.objective(x)));
  RMat hess(n, n);
  RVec grad(n);
  Eigen::Index low_rank_cols = 0;
  for (const auto& con : p.constraints) low_rank_cols += 1 + (con.factored() ? con.factor.cols() : 0);
  RMat low_rank(n, low_rank_cols);
  for (int outer = 0; outer < opt.max_outer; ++outer) {
    for (int it = 0; it < opt.max_newton; ++it) {
      eval_constraints(x);
      grad = t * 2.0 * (p.q0_mat * x + p.q0_vec);
      hess = t * 2.0 * p.q0_mat;
      // every low-rank Hessian contribution goes into one symmetric rank update
      Eigen::Index col = 0;
      for (std::size_t k = 0; k < p.constraints.size(); ++k) {
        const auto& con = p.constraints[k];
        const double inv = -1.0 / f[k];
        RVec gk = 2.0 * (con.quad_times(x) + con.q_vec);
        grad += inv * gk;
        if (con.factored()) {
          if (con.factor.size() > 0) {
            low_rank.middleCols(col, con.factor.cols()) = std::sqrt(2.0 * inv) * con.factor;
            col += con.factor.cols();
          }
        } else {
          hess += (2.0 * inv) * con.q_mat;
        }
        low_rank.col(col++) = inv * gk;
      }
      hess.selfadjointView<Eigen::Lower>().rankUpdate(low_rank.leftCols(col));
      hess.triangularView<Eigen::StrictlyUpper>() = hess.transpose();
      Eigen::LLT<RMat> llt(hess);
      if (llt.info() != Eigen::Success) {
        const double reg = 1e-12 * std::max(1.0, hess.diagonal().cwiseAbs().maxCoeff());
        llt.compute(hess + reg * RMat::Identity(n, n));
        if (llt.info() != Eigen::Success) {
          out.x = x;
          out.status = SolverStatus::NumericalFailure;
          return out;
        }
      }
      RVec dx = llt.solve(-grad);
      const double decrement = -grad.dot(dx);
      ++out.newton_steps;
      if (!std::isfinite(decrement)) {
        out.x = x;
        out.status = SolverStatus::NumericalFailure;
        return out;
      }
      if (decrement / 2.0 <= 1e-10) break;

      double step = 1.0;
      const double phi0 = barrier_value(x, t);
      const double slope = grad.dot(dx);
      bool moved = false;
      while (step > 1e-16) {
        RVec trial = x + step * dx;
        const double phi = barrier_value(trial, t);
        if (phi <= phi0 + 0.01 * step * slope) {
          x = std::move(trial);
          moved = true;
          break;
        }
        step *= 0.5;
      }
      if (!moved) break;  // stalled at rounding level
    }
    out.trajectory.push_back(p.objective(x));
    out.gap = m / t;
    if (early_stop && early_stop(x)) {
      out.x = x;
      out.status = SolverStatus::Optimal;
      out.stopped_early = true;
      return out;
    }
    if (out.gap <= opt.tol * std::max(1.0, std::abs(p.objective(x)))) {
      out.x = x;
      out.status = SolverStatus::Optimal;
      return out;
    }
    t *= opt.mu;
  }
  out.x = x;
  out.status = SolverStatus::IterLimit;
  return out;
}

}  // namespace

void ConvexQcqp::validate() const {
  const Eigen::Index n = q0_vec.size();
  if (q0_mat.rows() != n || q0_mat.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "objective matrix does not match linear term");
  }
  if (!is_psd(q0_mat)) throw Error(ErrorCode::InvalidArgument, "objective matrix is not PSD");
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& con = constraints[k];
    const bool shape_ok = con.factored() ? (con.factor.size() == 0 || con.factor.rows() == n)
                                         : (con.q_mat.rows() == n && con.q_mat.cols() == n);
    if (!shape_ok || con.q_vec.size() != n) {
      throw Error(ErrorCode::DimensionMismatch, "constraint " + std::to_string(k) + " has wrong shape");
    }
    if (!con.factored() && !is_psd(con.q_mat)) {
      throw Error(ErrorCode::InvalidArgument, "constraint " + std::to_string(k) + " is not PSD");
    }
  }
}

QcqpResult solve_convex_qcqp(const ConvexQcqp& problem, const std::optional<RVec>& x0,
                             const QcqpOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  problem.validate();
  const Eigen::Index n = problem.dim();
  if (options.require_even_dim && n % 2 != 0) {
    throw Error(ErrorCode::InvalidArgument, "lifted QCQP dimension must be even");
  }
  if (x0 && x0->size() != n) throw Error(ErrorCode::DimensionMismatch, "start point length");

  QcqpResult result;
  auto finish = [&](SolverStatus status, const RVec& x, const BarrierOutcome* phase2) {
    result.x = x;
    result.report.status = status;
    result.report.objective = problem.objective(x);
    result.report.residual = std::max(0.0, problem.max_violation(x));
    if (phase2) {
      result.report.gap = phase2->gap;
      result.report.trajectory = phase2->trajectory;
      result.report.iterations += phase2->newton_steps;
    }
    result.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return result;
  };

  RVec x = x0 ? *x0 : RVec::Zero(n);
  const bool strictly_feasible =
      x0 && std::all_of(problem.constraints.begin(), problem.constraints.end(),
                        [&](const QuadraticConstraint& c) { return c.value(x) < 0.0; });

  if (!strictly_feasible && !problem.constraints.empty()) {
    // Phase I over (x, s): min s  s.t. f_k(x) <= s, ||x - x_ref||^2 <= radius^2.
    ConvexQcqp phase1;
    phase1.q0_mat = RMat::Zero(n + 1, n + 1);
    phase1.q0_vec = RVec::Zero(n + 1);
    phase1.q0_vec(n) = 0.5;
    double scale = 1.0;
    double s0 = -std::numeric_limits<double>::infinity();
    for (const auto& con : problem.constraints) {
      QuadraticConstraint aug;
      if (con.factored()) {
        aug.factor = RMat::Zero(n + 1, con.factor.cols());
        aug.factor.topRows(n) = con.factor;
      } else {
        aug.q_mat = RMat::Zero(n + 1, n + 1);
        aug.q_mat.topLeftCorner(n, n) = con.q_mat;
      }
      aug.q_vec = RVec::Zero(n + 1);
      aug.q_vec.head(n) = con.q_vec;
      aug.q_vec(n) = -0.5;
      aug.c = con.c;
      phase1.constraints.push_back(std::move(aug));
      scale = std::max(scale, std::abs(con.c));
      s0 = std::max(s0, con.value(x));
    }
    const double radius2 = 1e6 * (1.0 + x.squaredNorm());
    QuadraticConstraint ball;
    ball.q_mat = RMat::Zero(n + 1, n + 1);
    ball.q_mat.topLeftCorner(n, n).setIdentity();
    ball.q_vec = RVec::Zero(n + 1);
    ball.q_vec.head(n) = -x;
    ball.c = x.squaredNorm() - radius2;
    phase1.constraints.push_back(std::move(ball));

    RVec xs(n + 1);
    xs.head(n) = x;
    xs(n) = s0 + std::max(1.0, std::abs(s0));
    const double margin = 1e-6 * scale;
    QcqpOptions opt1 = options;
    opt1.require_even_dim = false;
    BarrierOutcome p1 = run_barrier(phase1, xs, opt1, [&](const RVec& z) { return z(n) <= -margin; });
    result.phase1_iterations = p1.newton_steps;
    result.report.iterations = p1.newton_steps;
    const RVec xp = p1.x.head(n);
    const bool found = std::all_of(problem.constraints.begin(), problem.constraints.end(),
                                   [&](const QuadraticConstraint& c) { return c.value(xp) < 0.0; });
    if (!found) {
      const SolverStatus st = p1.status == SolverStatus::Optimal ? SolverStatus::Infeasible : p1.status;
      return finish(st, xp, nullptr);
    }
    x = xp;
  }

  BarrierOutcome p2 = run_barrier(problem, x, options, nullptr);
  return finish(p2.status, p2.x, &p2);
}

}  // namespace mcbf
