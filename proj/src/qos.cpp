// SPDX-License-Identifier: Apache-2.0
#include "mcbf/qos.hpp"

#include <chrono>
#include <cmath>

#include "mcbf/error.hpp"

namespace mcbf {

namespace {

void check_groups(const BeamformerSet& w, const ChannelSet& ch) {
  if (static_cast<int>(w.size()) != ch.groups()) {
    throw Error(ErrorCode::DimensionMismatch, "one beamformer per group expected");
  }
  for (const auto& wi : w) {
    if (wi.size() != ch.antennas()) throw Error(ErrorCode::DimensionMismatch, "beamformer length != N");
  }
}

void check_users(const RVec& v, const ChannelSet& ch, const char* what) {
  if (v.size() != ch.k_tot()) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " needs one entry per user");
  }
}

// Diagonal weights lambda_ik gamma_ik, optionally with one group zeroed.
RVec loading(const RVec& lambda, const RVec& gamma, const ChannelSet& ch, int skip_group) {
  check_users(lambda, ch, "lambda");
  check_users(gamma, ch, "gamma");
  RVec d = lambda.cwiseProduct(gamma);
  if (skip_group >= 0) {
    int off = 0;
    for (int i = 0; i < skip_group; ++i) off += ch.users(i);
    d.segment(off, ch.users(skip_group)).setZero();
  }
  return d;
}

CMat loaded_identity(const CMat& s, const RVec& d) {
  CMat r = s * d.cast<cdouble>().asDiagonal() * s.adjoint();
  r.diagonal().array() += 1.0;
  return 0.5 * (r + r.adjoint());
}

}  // namespace

RVec sinr(const BeamformerSet& w, const ChannelSet& ch, double sigma2) {
  check_groups(w, ch);
  const int g = ch.groups();
  RVec out(ch.k_tot());
  int u = 0;
  for (int i = 0; i < g; ++i) {
    for (int k = 0; k < ch.users(i); ++k, ++u) {
      const auto h = ch.H[static_cast<std::size_t>(i)].col(k);
      double signal = 0.0;
      double interference = sigma2;
      for (int j = 0; j < g; ++j) {
        const double p = std::norm(w[static_cast<std::size_t>(j)].dot(h));
        if (j == i) {
          signal = p;
        } else {
          interference += p;
        }
      }
      out(u) = signal / interference;
    }
  }
  return out;
}

double total_power(const BeamformerSet& w) {
  double p = 0.0;
  for (const auto& wi : w) p += wi.squaredNorm();
  return p;
}

double min_sinr_ratio(const BeamformerSet& w, const ChannelSet& ch, const RVec& gamma, double sigma2) {
  check_users(gamma, ch, "gamma");
  return sinr(w, ch, sigma2).cwiseQuotient(gamma).minCoeff();
}

bool meets_targets(const BeamformerSet& w, const ChannelSet& ch, const RVec& gamma, double sigma2,
                   double slack) {
  check_users(gamma, ch, "gamma");
  const RVec s = sinr(w, ch, sigma2);
  for (Eigen::Index u = 0; u < s.size(); ++u) {
    if (!(s(u) >= gamma(u) * (1.0 - slack))) return false;
  }
  return true;
}

CMat build_R(const RVec& lambda, const ChannelSet& ch, const RVec& gamma) {
  return loaded_identity(ch.stacked(), loading(lambda, gamma, ch, -1));
}

CMat build_R_minus(const RVec& lambda, const ChannelSet& ch, const RVec& gamma, int group) {
  if (group < 0 || group >= ch.groups()) throw Error(ErrorCode::InvalidArgument, "group index out of range");
  return loaded_identity(ch.stacked(), loading(lambda, gamma, ch, group));
}

BeamformerSet assemble_beamformer(const RVec& lambda, const std::vector<CVec>& a, const ChannelSet& ch,
                                  const RVec& gamma) {
  if (static_cast<int>(a.size()) != ch.groups()) throw Error(ErrorCode::DimensionMismatch, "one weight vector per group");
  CMat rhs(ch.antennas(), ch.groups());
  for (int i = 0; i < ch.groups(); ++i) {
    const auto& ai = a[static_cast<std::size_t>(i)];
    if (ai.size() != ch.users(i)) throw Error(ErrorCode::DimensionMismatch, "weight length != K_i");
    rhs.col(i) = ch.H[static_cast<std::size_t>(i)] * ai;
  }
  const CMat sol = HermitianFactor(build_R(lambda, ch, gamma)).solve(rhs);
  BeamformerSet w;
  for (int i = 0; i < ch.groups(); ++i) w.emplace_back(sol.col(i));
  return w;
}

BeamformerSet assemble_beamformer_alt(const RVec& lambda, const std::vector<CVec>& alpha,
                                      const ChannelSet& ch, const RVec& gamma) {
  if (static_cast<int>(alpha.size()) != ch.groups()) throw Error(ErrorCode::DimensionMismatch, "one weight vector per group");
  BeamformerSet w;
  for (int i = 0; i < ch.groups(); ++i) {
    const CVec rhs = ch.H[static_cast<std::size_t>(i)] * alpha[static_cast<std::size_t>(i)];
    w.push_back(HermitianFactor(build_R_minus(lambda, ch, gamma, i)).solve(rhs));
  }
  return w;
}

std::vector<CVec> group_delta(const BeamformerSet& w, const ChannelSet& ch) {
  check_groups(w, ch);
  std::vector<CVec> delta;
  for (int i = 0; i < ch.groups(); ++i) {
    delta.push_back(ch.H[static_cast<std::size_t>(i)].adjoint() * w[static_cast<std::size_t>(i)]);
  }
  return delta;
}

std::vector<CVec> alpha_from_a(const RVec& lambda, const std::vector<CVec>& a, const ChannelSet& ch,
                               const RVec& gamma) {
  const auto delta = group_delta(assemble_beamformer(lambda, a, ch, gamma), ch);
  std::vector<CVec> alpha;
  int off = 0;
  for (int i = 0; i < ch.groups(); ++i) {
    const int k_i = ch.users(i);
    const RVec lg = lambda.segment(off, k_i).cwiseProduct(gamma.segment(off, k_i));
    alpha.push_back(a[static_cast<std::size_t>(i)] - lg.cast<cdouble>().cwiseProduct(delta[static_cast<std::size_t>(i)]));
    off += k_i;
  }
  return alpha;
}

double weight_relation_residual(const RVec& lambda, const std::vector<CVec>& a, const BeamformerSet& w,
                                const ChannelSet& ch, const RVec& gamma) {
  const auto delta = group_delta(w, ch);
  double worst = 0.0;
  double scale = 0.0;
  int u = 0;
  for (int i = 0; i < ch.groups(); ++i) {
    for (int k = 0; k < ch.users(i); ++k, ++u) {
      const cdouble ai = a[static_cast<std::size_t>(i)](k);
      const cdouble rel = lambda(u) * delta[static_cast<std::size_t>(i)](k) * (1.0 + gamma(u));
      worst = std::max(worst, std::abs(ai - rel));
      scale = std::max(scale, std::abs(ai));
    }
  }
  return scale > 0.0 ? worst / scale : worst;
}

void normalize_phase(std::vector<CVec>& a) {
  for (auto& ai : a) {
    const double top = ai.size() ? ai.cwiseAbs().maxCoeff() : 0.0;
    for (Eigen::Index k = 0; k < ai.size(); ++k) {
      if (std::abs(ai(k)) > 1e-12 * top && top > 0.0) {
        ai *= std::conj(ai(k)) / std::abs(ai(k));
        ai(k) = std::abs(ai(k));
        break;
      }
    }
  }
}

double power_identity(const RVec& lambda, const RVec& gamma, double sigma2) {
  return sigma2 * lambda.dot(gamma);
}

UnicastSolution unicast_reference(const ChannelSet& ch, const RVec& gamma, double sigma2, double tol,
                                  int max_iter) {
  const auto start = std::chrono::steady_clock::now();
  for (int i = 0; i < ch.groups(); ++i) {
    if (ch.users(i) != 1) throw Error(ErrorCode::InvalidArgument, "unicast reference needs K_i = 1");
  }
  check_users(gamma, ch, "gamma");
  const int g = ch.groups();
  const CMat s = ch.stacked();

  UnicastSolution out;
  RVec lambda = RVec::Zero(g);
  bool converged = false;
  for (int it = 1; it <= max_iter; ++it) {
    const CMat rinv_h = HermitianFactor(loaded_identity(s, lambda.cwiseProduct(gamma))).solve(s);
    RVec next(g);
    double residual = 0.0;
    for (int i = 0; i < g; ++i) {
      const double q = std::real(s.col(i).dot(rinv_h.col(i)));
      next(i) = 1.0 / ((1.0 + gamma(i)) * q);
      residual = std::max(residual, std::abs(lambda(i) * (1.0 + gamma(i)) * q - 1.0));
    }
    out.report.trajectory.push_back(residual);
    out.report.iterations = it;
    const double change = (next - lambda).cwiseAbs().maxCoeff() / next.cwiseAbs().maxCoeff();
    lambda = next;
    if (!std::isfinite(lambda.sum()) || sigma2 * lambda.dot(gamma) > 1e14) break;
    if (change <= tol) {
      converged = true;
      break;
    }
  }
  if (!converged) throw Error(ErrorCode::Infeasible, "uplink fixed point diverges, targets unreachable");

  const CMat dirs = HermitianFactor(loaded_identity(s, lambda.cwiseProduct(gamma))).solve(s);
  CMat u = dirs;
  for (int i = 0; i < g; ++i) u.col(i).normalize();
  RMat f(g, g);  // f(i, j) = |u_j^H h_i|^2
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) f(i, j) = std::norm(u.col(j).dot(s.col(i)));
  RMat sys = -f;
  for (int i = 0; i < g; ++i) sys(i, i) = f(i, i) / gamma(i);
  const RVec p = sys.partialPivLu().solve(RVec::Constant(g, sigma2));
  if (!p.allFinite() || p.minCoeff() <= 0.0) throw Error(ErrorCode::Infeasible, "downlink power system has no positive solution");

  for (int i = 0; i < g; ++i) out.w.emplace_back(std::sqrt(p(i)) * u.col(i));
  out.lambda = lambda;
  out.power = p;
  out.report.status = SolverStatus::Optimal;
  out.report.objective = p.sum();
  out.report.residual = out.report.trajectory.back();
  out.report.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

RVec structure_residual(const BeamformerSet& w, const RVec& lambda, const ChannelSet& ch, const RVec& gamma) {
  check_groups(w, ch);
  const HermitianFactor r(build_R(lambda, ch, gamma));
  RVec out(ch.groups());
  for (int i = 0; i < ch.groups(); ++i) {
    const auto& wi = w[static_cast<std::size_t>(i)];
    const double nw = wi.norm();
    if (nw == 0.0) {
      out(i) = 0.0;
      continue;
    }
    const CMat u = orthonormal_range(r.solve(CMat(ch.H[static_cast<std::size_t>(i)]))).u;
    out(i) = (wi - u * (u.adjoint() * wi)).norm() / nw;
  }
  return out;
}

double collinearity_sine(const CVec& x, const CVec& y) {
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return nx == ny ? 0.0 : 1.0;
  // residual of y after projecting on x; stable near collinearity unlike sqrt(1 - cos^2)
  const CVec xn = x / nx;
  const CVec yn = y / ny;
  return std::min(1.0, (yn - xn * xn.dot(yn)).norm());
}

RVec duality_check(const BeamformerSet& w, const RVec& lambda, const ChannelSet& ch, const RVec& gamma) {
  const auto delta = group_delta(w, ch);
  RVec out(ch.groups());
  int off = 0;
  for (int i = 0; i < ch.groups(); ++i) {
    const int k_i = ch.users(i);
    const CVec weights = lambda.segment(off, k_i).cast<cdouble>().cwiseProduct(delta[static_cast<std::size_t>(i)]);
    const CVec v = HermitianFactor(build_R_minus(lambda, ch, gamma, i)).solve(CVec(ch.H[static_cast<std::size_t>(i)] * weights));
    out(i) = collinearity_sine(w[static_cast<std::size_t>(i)], v);
    off += k_i;
  }
  return out;
}

}  // namespace mcbf
