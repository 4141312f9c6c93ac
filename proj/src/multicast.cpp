// SPDX-License-Identifier: Apache-2.0
#include "mcbf/multicast.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mcbf/error.hpp"
#include "mcbf/rng.hpp"

namespace mcbf {

namespace {

std::size_t ix(int k) { return static_cast<std::size_t>(k); }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

int MulticastProblem::total_dim() const {
  int d = 0;
  for (int i = 0; i < groups(); ++i) d += dim(i);
  return d;
}

int MulticastProblem::group_of(int user) const {
  int off = 0;
  for (int i = 0; i < groups(); ++i) {
    off += users[ix(i)];
    if (user < off) return i;
  }
  throw Error(ErrorCode::InvalidArgument, "user index out of range");
}

double MulticastProblem::objective(const std::vector<CVec>& x) const {
  double f = 0.0;
  for (int i = 0; i < groups(); ++i) f += std::real(x[ix(i)].dot(gram[ix(i)] * x[ix(i)]));
  return f;
}

RVec MulticastProblem::sinr(const std::vector<CVec>& x) const {
  // proj(j, u) = |x_j^H f_{j,u}|^2
  RMat proj(groups(), k_tot());
  for (int j = 0; j < groups(); ++j) {
    proj.row(j) = (x[ix(j)].adjoint() * cross[ix(j)]).cwiseAbs2();
  }
  RVec out(k_tot());
  for (int u = 0; u < k_tot(); ++u) {
    const int i = group_of(u);
    const double own = proj(i, u);
    out(u) = own / (proj.col(u).sum() - own + sigma2);
  }
  return out;
}

double MulticastProblem::violation(const std::vector<CVec>& x) const {
  const RVec s = sinr(x);
  double worst = 0.0;
  for (int u = 0; u < k_tot(); ++u) worst = std::max(worst, 1.0 - s(u) / gamma(u));
  return worst;
}

void MulticastProblem::validate() const {
  if (groups() < 1 || cross.size() != gram.size() || users.size() != gram.size()) {
    throw Error(ErrorCode::DimensionMismatch, "per-group data lengths differ");
  }
  int kt = 0;
  for (int i = 0; i < groups(); ++i) {
    if (users[ix(i)] < 1) throw Error(ErrorCode::InvalidArgument, "empty group");
    kt += users[ix(i)];
    if (gram[ix(i)].rows() != gram[ix(i)].cols() || cross[ix(i)].rows() != gram[ix(i)].rows()) {
      throw Error(ErrorCode::DimensionMismatch, "group " + std::to_string(i) + " data shapes disagree");
    }
  }
  for (int i = 0; i < groups(); ++i) {
    if (cross[ix(i)].cols() != kt) throw Error(ErrorCode::DimensionMismatch, "cross vectors need one column per user");
  }
  if (gamma.size() != kt) throw Error(ErrorCode::DimensionMismatch, "gamma needs one entry per user");
  if (gamma.minCoeff() <= 0.0 || !(sigma2 > 0.0)) throw Error(ErrorCode::InvalidArgument, "targets and noise must be positive");
}

SdpProblem relaxation_sdp(const MulticastProblem& problem) {
  problem.validate();
  SdpProblem sdp;
  for (int i = 0; i < problem.groups(); ++i) sdp.objective.push_back(0.5 * (problem.gram[ix(i)] + problem.gram[ix(i)].adjoint()));
  for (int u = 0; u < problem.k_tot(); ++u) {
    const int own = problem.group_of(u);
    SdpConstraint con;
    con.rhs = problem.sigma2;
    for (int j = 0; j < problem.groups(); ++j) {
      const double weight = j == own ? 1.0 / problem.gamma(u) : -1.0;
      con.terms.push_back({j, LowRankHermitian::rank_one(problem.cross[ix(j)].col(u), weight)});
    }
    sdp.constraints.push_back(std::move(con));
  }
  return sdp;
}

Relaxation solve_relaxation(const MulticastProblem& problem, const SdpOptions& options) {
  SdpResult res = solve_sdp(relaxation_sdp(problem), options);
  if (res.report.status == SolverStatus::Infeasible) {
    throw Error(ErrorCode::Infeasible, "SDP relaxation is infeasible: targets unreachable");
  }
  if (res.report.status == SolverStatus::IterLimit) {
    throw Error(ErrorCode::IterLimit, "SDP relaxation did not converge");
  }
  if (res.report.status == SolverStatus::NumericalFailure) {
    throw Error(ErrorCode::NumericalFailure, "SDP relaxation broke down");
  }
  Relaxation out;
  out.x = std::move(res.x);
  out.lower_bound = std::min(res.primal_objective, res.dual_objective);
  out.report = std::move(res.report);
  return out;
}

std::optional<RVec> min_group_powers(const MulticastProblem& problem, const std::vector<CVec>& directions) {
  const int g = problem.groups();
  const int kt = problem.k_tot();
  RMat proj(g, kt);
  for (int j = 0; j < g; ++j) proj.row(j) = (directions[ix(j)].adjoint() * problem.cross[ix(j)]).cwiseAbs2();
  std::vector<int> owner(ix(kt));
  for (int u = 0; u < kt; ++u) {
    owner[ix(u)] = problem.group_of(u);
    if (!(proj(owner[ix(u)], u) > 0.0)) return std::nullopt;
  }
  // T_i(p) = max_{u in i} gamma_u (sum_{j != i} p_j I_{j,u} + sigma2) / S_u
  auto apply = [&](const RVec& p, std::vector<int>* policy) {
    RVec t = RVec::Zero(g);
    if (policy) policy->assign(ix(g), -1);
    for (int u = 0; u < kt; ++u) {
      const int i = owner[ix(u)];
      const double interference = proj.col(u).dot(p) - proj(i, u) * p(i) + problem.sigma2;
      const double need = problem.gamma(u) * interference / proj(i, u);
      if (policy && ((*policy)[ix(i)] < 0 || need > t(i))) (*policy)[ix(i)] = u;
      t(i) = std::max(t(i), need);
    }
    return t;
  };
  RVec p = RVec::Zero(g);
  std::vector<int> policy;
  for (int round = 0; round < 4 * g + 20; ++round) {
    apply(p, &policy);
    RMat sys = RMat::Identity(g, g);
    RVec rhs(g);
    for (int i = 0; i < g; ++i) {
      const int u = policy[ix(i)];
      const double scale = problem.gamma(u) / proj(i, u);
      for (int j = 0; j < g; ++j) {
        if (j != i) sys(i, j) = -scale * proj(j, u);
      }
      rhs(i) = scale * problem.sigma2;
    }
    const RVec next = sys.partialPivLu().solve(rhs);
    if (!next.allFinite() || next.minCoeff() <= 0.0) return std::nullopt;  // spectral radius >= 1
    p = next.cwiseMax(p);
    const RVec t = apply(p, nullptr);
    if (((t - p).array() / p.array()).maxCoeff() <= 1e-12) return p * (1.0 + 1e-9);
  }
  return std::nullopt;
}

Extraction randomize_and_scale(const MulticastProblem& problem, const std::vector<CMat>& x, int n_rand,
                               std::uint64_t seed) {
  problem.validate();
  const int g = problem.groups();
  std::vector<CMat> factor(ix(g));
  std::vector<CVec> principal(ix(g));
  bool rank_one = true;
  for (int i = 0; i < g; ++i) {
    Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (x[ix(i)] + x[ix(i)].adjoint()));
    const RVec ev = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::Index d = ev.size();
    principal[ix(i)] = eig.eigenvectors().col(d - 1) * std::sqrt(ev(d - 1));
    if (d > 1 && ev(d - 2) > kRankOneRatio * ev(d - 1)) rank_one = false;
    factor[ix(i)] = eig.eigenvectors() * ev.cwiseSqrt().cast<cdouble>().asDiagonal();
  }

  Extraction best;
  best.objective = std::numeric_limits<double>::infinity();
  best.rank_one = rank_one;
  auto consider = [&](std::vector<CVec> dirs) {
    const auto p = min_group_powers(problem, dirs);
    if (!p) return;
    for (int i = 0; i < g; ++i) dirs[ix(i)] *= std::sqrt((*p)(i));
    ++best.feasible_candidates;
    const double f = problem.objective(dirs);
    if (f < best.objective) {
      best.objective = f;
      best.x = std::move(dirs);
    }
  };
  consider(principal);
  if (!rank_one) {
    const CounterRng rng(seed, 2);
    const auto total = static_cast<std::uint64_t>(problem.total_dim());
    for (int draw = 0; draw < n_rand; ++draw) {
      std::vector<CVec> dirs(ix(g));
      std::uint64_t index = static_cast<std::uint64_t>(draw) * total;
      for (int i = 0; i < g; ++i) {
        CVec xi(problem.dim(i));
        for (Eigen::Index k = 0; k < xi.size(); ++k) xi(k) = rng.complex_normal(index++);
        dirs[ix(i)] = factor[ix(i)] * xi;
      }
      consider(std::move(dirs));
    }
  }
  if (best.feasible_candidates == 0) {
    throw Error(ErrorCode::RandomizationFailed, "no randomized candidate admits a feasible power scaling");
  }
  return best;
}

ScaResult solve_sca(const MulticastProblem& problem, const std::vector<CVec>& x0, const ScaOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  problem.validate();
  if (static_cast<int>(x0.size()) != problem.groups()) throw Error(ErrorCode::DimensionMismatch, "start point groups");
  for (int i = 0; i < problem.groups(); ++i) {
    if (x0[ix(i)].size() != problem.dim(i)) throw Error(ErrorCode::DimensionMismatch, "start point block length");
  }
  if (problem.violation(x0) > 1e-6) throw Error(ErrorCode::InfeasibleStart, "SCA start point misses an SINR target");

  const int g = problem.groups();
  const int kt = problem.k_tot();
  const int d = problem.total_dim();
  std::vector<int> offset(ix(g), 0);
  for (int i = 1; i < g; ++i) offset[ix(i)] = offset[ix(i - 1)] + problem.dim(i - 1);
  std::vector<int> owner(ix(kt));
  for (int u = 0; u < kt; ++u) owner[ix(u)] = problem.group_of(u);

  auto stack = [&](const std::vector<CVec>& x) {
    CVec z(d);
    for (int i = 0; i < g; ++i) z.segment(offset[ix(i)], problem.dim(i)) = x[ix(i)];
    return z;
  };
  auto split = [&](const CVec& z) {
    std::vector<CVec> x(ix(g));
    for (int i = 0; i < g; ++i) x[ix(i)] = z.segment(offset[ix(i)], problem.dim(i));
    return x;
  };

  // Fixed parts of the lifted subproblem.
  ConvexQcqp sub;
  {
    CMat q0 = CMat::Zero(d, d);
    for (int i = 0; i < g; ++i) q0.block(offset[ix(i)], offset[ix(i)], problem.dim(i), problem.dim(i)) = problem.gram[ix(i)];
    sub.q0_mat = lift_hermitian(0.5 * (q0 + q0.adjoint()));
    sub.q0_vec = RVec::Zero(2 * d);
  }
  std::vector<double> coef(ix(kt));
  for (int u = 0; u < kt; ++u) {
    const int i = owner[ix(u)];
    // |x_j^H f|^2 = (lift(x)^T lift(f))^2 + (lift(x)^T lift(i f))^2
    std::vector<RVec> cols;
    for (int j = 0; j < g; ++j) {
      if (j == i && options.form == ScaForm::OwnSignal) continue;
      CVec f = CVec::Zero(d);
      f.segment(offset[ix(j)], problem.dim(j)) = problem.cross[ix(j)].col(u);
      cols.push_back(lift_vector(f));
      cols.push_back(lift_vector(cdouble(0.0, 1.0) * f));
    }
    QuadraticConstraint con;
    con.factor.resize(2 * d, static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) con.factor.col(static_cast<Eigen::Index>(c)) = cols[c];
    con.q_vec = RVec::Zero(2 * d);
    coef[ix(u)] = options.form == ScaForm::Weight ? 1.0 / problem.gamma(u) + 1.0 : 1.0 / problem.gamma(u);
    sub.constraints.push_back(std::move(con));
  }

  ScaResult out;
  out.x = x0;
  double current = problem.objective(x0);
  out.report.trajectory.push_back(current);
  out.report.status = SolverStatus::IterLimit;
  for (int it = 1; it <= options.max_iter; ++it) {
    const CVec v = stack(out.x);
    double margin = std::numeric_limits<double>::infinity();
    for (int u = 0; u < kt; ++u) {
      const int i = owner[ix(u)];
      const CVec& f = problem.cross[ix(i)].col(u);
      const cdouble proj = f.dot(out.x[ix(i)]);  // f^H v_i
      CVec lin = CVec::Zero(d);
      lin.segment(offset[ix(i)], problem.dim(i)) = f * proj;
      auto& con = sub.constraints[ix(u)];
      con.q_vec = -coef[ix(u)] * lift_vector(lin);
      con.c = coef[ix(u)] * std::norm(proj) + problem.sigma2;
      // value at (1 + e) v is value(v) + 2e (A - B) + e^2 A with A - B <= -sigma2
      const double quad = (con.factor.transpose() * lift_vector(v)).squaredNorm();
      const double slope = quad - coef[ix(u)] * std::norm(proj);
      if (quad > 0.0) margin = std::min(margin, -slope / quad);
    }
    const double e = std::clamp(0.5 * margin, 1e-9, 1e-2);
    const auto res = solve_convex_qcqp(sub, RVec(lift_vector(v) * (1.0 + e)), options.qcqp);
    out.report.iterations = it;
    if (res.report.status != SolverStatus::Optimal) {
      out.report.status = res.report.status;
      break;
    }
    std::vector<CVec> next = split(unlift_vector(res.x));
    const double value = problem.objective(next);
    if (value > current || problem.violation(next) > 1e-9) {
      out.report.status = SolverStatus::Optimal;  // no further descent available
      break;
    }
    const double decrease = (current - value) / std::max(current, std::numeric_limits<double>::min());
    out.x = std::move(next);
    current = value;
    out.report.trajectory.push_back(current);
    if (decrease <= options.tol) {
      out.report.status = SolverStatus::Optimal;
      out.report.gap = decrease;
      break;
    }
  }
  out.report.objective = current;
  out.report.residual = problem.violation(out.x);
  out.report.wall_ms = elapsed_ms(start);
  return out;
}

}  // namespace mcbf
