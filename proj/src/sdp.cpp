// SPDX-License-Identifier: Apache-2.0
#include "mcbf/sdp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "mcbf/error.hpp"

namespace mcbf {

LowRankHermitian LowRankHermitian::rank_one(const CVec& v, double weight) {
  LowRankHermitian a;
  a.vectors = v;
  a.weights = RVec::Constant(1, weight);
  return a;
}

LowRankHermitian LowRankHermitian::from_dense(const CMat& a, double tol) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(a);
  const RVec& ev = eig.eigenvalues();
  const double top = ev.size() ? ev.cwiseAbs().maxCoeff() : 0.0;
  LowRankHermitian out;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index k = 0; k < ev.size(); ++k) {
    if (std::abs(ev(k)) > tol * top && top > 0.0) keep.push_back(k);
  }
  out.vectors.resize(a.rows(), static_cast<Eigen::Index>(keep.size()));
  out.weights.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) {
    out.vectors.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
    out.weights(static_cast<Eigen::Index>(c)) = ev(keep[c]);
  }
  return out;
}

CMat LowRankHermitian::dense() const {
  return vectors * weights.cast<cdouble>().asDiagonal() * vectors.adjoint();
}

double LowRankHermitian::trace_with(const CMat& x) const {
  double acc = 0.0;
  for (Eigen::Index r = 0; r < vectors.cols(); ++r) {
    acc += weights(r) * std::real(vectors.col(r).dot(x * vectors.col(r)));
  }
  return acc;
}

void SdpProblem::validate() const {
  if (objective.empty()) throw Error(ErrorCode::InvalidArgument, "SDP needs at least one block");
  for (const auto& c : objective) {
    if (c.rows() != c.cols() || c.rows() == 0) {
      throw Error(ErrorCode::DimensionMismatch, "objective block must be square and nonempty");
    }
    if (!is_hermitian(c, 1e-10)) throw Error(ErrorCode::InvalidArgument, "objective block not Hermitian");
  }
  for (std::size_t m = 0; m < constraints.size(); ++m) {
    for (const auto& term : constraints[m].terms) {
      if (term.block < 0 || term.block >= block_count()) {
        throw Error(ErrorCode::InvalidArgument, "constraint " + std::to_string(m) + " references a bad block");
      }
      if (term.coef.vectors.rows() != objective[static_cast<std::size_t>(term.block)].rows() ||
          term.coef.vectors.cols() != term.coef.weights.size()) {
        throw Error(ErrorCode::DimensionMismatch, "constraint " + std::to_string(m) + " term shape");
      }
    }
  }
}

namespace {

// All constraint vectors of one block stacked side by side.
struct BlockVectors {
  CMat v;                   // d x T
  RVec w;                   // T
  std::vector<int> owner;   // constraint index of each column
};

double max_step(const CMat& x, const CMat& dx) {
  Eigen::LLT<CMat> llt(x);
  if (llt.info() != Eigen::Success) return 0.0;
  CMat t = llt.matrixL().solve(dx);
  t = llt.matrixL().solve(t.adjoint().eval()).adjoint();
  t = 0.5 * (t + t.adjoint()).eval();
  const double lmin = Eigen::SelfAdjointEigenSolver<CMat>(t, Eigen::EigenvaluesOnly).eigenvalues()(0);
  return lmin < 0.0 ? -1.0 / lmin : std::numeric_limits<double>::infinity();
}

double max_step(const RVec& x, const RVec& dx) {
  double a = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    if (dx(k) < 0.0) a = std::min(a, -x(k) / dx(k));
  }
  return a;
}

CMat herm(const CMat& a) { return 0.5 * (a + a.adjoint()); }

class Solver {
 public:
  Solver(const SdpProblem& p, const SdpOptions& opt) : opt_(opt) {
    nb_ = p.block_count();
    m_ = static_cast<int>(p.constraints.size());
    c_scale_ = 1.0;
    for (const auto& c : p.objective) c_scale_ = std::max(c_scale_, c.norm());
    for (const auto& c : p.objective) c_.push_back(c / c_scale_);
    row_scale_ = RVec::Ones(m_);
    rhs_ = RVec::Zero(m_);
    blocks_.resize(static_cast<std::size_t>(nb_));
    for (int m = 0; m < m_; ++m) {
      const auto& con = p.constraints[static_cast<std::size_t>(m)];
      double norm = 0.0;
      for (const auto& t : con.terms) {
        for (Eigen::Index r = 0; r < t.coef.vectors.cols(); ++r) {
          norm += std::abs(t.coef.weights(r)) * t.coef.vectors.col(r).squaredNorm();
        }
      }
      row_scale_(m) = norm > 0.0 ? norm : 1.0;
      rhs_(m) = con.rhs / row_scale_(m);
    }
    for (int b = 0; b < nb_; ++b) {
      std::vector<CVec> cols;
      std::vector<double> ws;
      std::vector<int> own;
      for (int m = 0; m < m_; ++m) {
        for (const auto& t : p.constraints[static_cast<std::size_t>(m)].terms) {
          if (t.block != b) continue;
          for (Eigen::Index r = 0; r < t.coef.vectors.cols(); ++r) {
            cols.push_back(t.coef.vectors.col(r));
            ws.push_back(t.coef.weights(r) / row_scale_(m));
            own.push_back(m);
          }
        }
      }
      auto& bv = blocks_[static_cast<std::size_t>(b)];
      const Eigen::Index d = c_[static_cast<std::size_t>(b)].rows();
      bv.v.resize(d, static_cast<Eigen::Index>(cols.size()));
      bv.w.resize(static_cast<Eigen::Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) {
        bv.v.col(static_cast<Eigen::Index>(k)) = cols[k];
        bv.w(static_cast<Eigen::Index>(k)) = ws[k];
      }
      bv.owner = std::move(own);
    }
  }

  SdpResult run() {
    const auto start = std::chrono::steady_clock::now();
    init();
    SdpResult res;
    double total_dim = m_;
    for (const auto& c : c_) total_dim += static_cast<double>(c.rows());
    double c_norm = 0.0;
    for (const auto& c : c_) c_norm += c.squaredNorm();
    c_norm = std::sqrt(c_norm);
    const double r_norm = rhs_.norm();

    SolverStatus status = SolverStatus::IterLimit;
    int iter = 0;
    double relgap = 0.0;
    double pinf = 0.0;
    double dinf = 0.0;
    for (;; ++iter) {
      // residuals
      RVec ax = apply(x_);
      RVec rp = rhs_ - ax + s_;
      std::vector<CMat> rd(static_cast<std::size_t>(nb_));
      double rd_norm2 = 0.0;
      for (int b = 0; b < nb_; ++b) {
        rd[ub(b)] = c_[ub(b)] - adjoint(b, y_) - z_[ub(b)];
        rd_norm2 += rd[ub(b)].squaredNorm();
      }
      RVec rz = y_ - zs_;
      double xz = s_.dot(zs_);
      double pobj = 0.0;
      for (int b = 0; b < nb_; ++b) {
        xz += std::real((x_[ub(b)] * z_[ub(b)]).trace());
        pobj += std::real((c_[ub(b)] * x_[ub(b)]).trace());
      }
      const double dobj = rhs_.dot(y_);
      const double mu = xz / total_dim;
      relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
      pinf = rp.norm() / (1.0 + r_norm);
      dinf = std::sqrt(rd_norm2 + rz.squaredNorm()) / (1.0 + c_norm);
      trace_.push_back({pobj * c_scale_, dobj * c_scale_, pinf, dinf});
      if (std::max({relgap, pinf, dinf}) <= opt_.tol) {
        status = SolverStatus::Optimal;
        break;
      }
      if (dual_ray()) {
        status = SolverStatus::Infeasible;
        break;
      }
      if (iter >= opt_.max_iter) break;

      // Schur complement
      RMat schur = RMat::Zero(m_, m_);
      std::vector<CMat> zinv(static_cast<std::size_t>(nb_));
      for (int b = 0; b < nb_; ++b) {
        Eigen::LLT<CMat> llt(z_[ub(b)]);
        if (llt.info() != Eigen::Success) {
          status = SolverStatus::NumericalFailure;
          break;
        }
        zinv[ub(b)] = herm(llt.solve(CMat::Identity(z_[ub(b)].rows(), z_[ub(b)].rows())));
        const auto& bv = blocks_[ub(b)];
        if (bv.v.cols() == 0) continue;
        const CMat pm = bv.v.adjoint() * x_[ub(b)] * bv.v;
        const CMat qm = bv.v.adjoint() * zinv[ub(b)] * bv.v;
        for (Eigen::Index r = 0; r < bv.v.cols(); ++r) {
          for (Eigen::Index q = 0; q < bv.v.cols(); ++q) {
            schur(bv.owner[ub(r)], bv.owner[ub(q)]) +=
                bv.w(r) * bv.w(q) * std::real(pm(r, q) * qm(q, r));
          }
        }
      }
      if (status == SolverStatus::NumericalFailure) break;
      RVec sz = s_.cwiseQuotient(zs_);
      schur.diagonal() += sz;
      schur = 0.5 * (schur + schur.transpose()).eval();
      Eigen::LLT<RMat> fac(schur);
      if (fac.info() != Eigen::Success) {
        const double reg = 1e-14 * std::max(1.0, schur.diagonal().maxCoeff());
        fac.compute(schur + reg * RMat::Identity(m_, m_));
        if (fac.info() != Eigen::Success) {
          status = SolverStatus::NumericalFailure;
          break;
        }
      }

      auto direction = [&](const std::vector<CMat>& rc, const RVec& rcs, std::vector<CMat>& dx,
                           std::vector<CMat>& dz, RVec& ds, RVec& dy, RVec& dzs) {
        RVec rhs = rp + rcs.cwiseQuotient(zs_) - sz.cwiseProduct(rz);
        for (int b = 0; b < nb_; ++b) {
          rhs -= apply_block(b, rc[ub(b)]);
          rhs += apply_block(b, x_[ub(b)] * rd[ub(b)] * zinv[ub(b)]);
        }
        dy = fac.solve(rhs);
        dzs = rz + dy;
        ds = (rcs - s_.cwiseProduct(dzs)).cwiseQuotient(zs_);
        dx.resize(ub(nb_));
        dz.resize(ub(nb_));
        for (int b = 0; b < nb_; ++b) {
          dz[ub(b)] = herm(rd[ub(b)] - adjoint(b, dy));
          dx[ub(b)] = herm(rc[ub(b)] - x_[ub(b)] * dz[ub(b)] * zinv[ub(b)]);
        }
      };
      auto steps = [&](const std::vector<CMat>& dx, const std::vector<CMat>& dz, const RVec& ds,
                       const RVec& dzs) {
        double ap = max_step(s_, ds);
        double ad = max_step(zs_, dzs);
        for (int b = 0; b < nb_; ++b) {
          ap = std::min(ap, max_step(x_[ub(b)], dx[ub(b)]));
          ad = std::min(ad, max_step(z_[ub(b)], dz[ub(b)]));
        }
        return std::pair<double, double>{ap, ad};
      };

      // predictor
      std::vector<CMat> rc(ub(nb_));
      for (int b = 0; b < nb_; ++b) rc[ub(b)] = -x_[ub(b)];
      RVec rcs = -s_.cwiseProduct(zs_);
      std::vector<CMat> dxa;
      std::vector<CMat> dza;
      RVec dsa;
      RVec dya;
      RVec dzsa;
      direction(rc, rcs, dxa, dza, dsa, dya, dzsa);
      auto [apa, ada] = steps(dxa, dza, dsa, dzsa);
      apa = std::min(1.0, apa);
      ada = std::min(1.0, ada);
      double mu_aff = (s_ + apa * dsa).dot(zs_ + ada * dzsa);
      for (int b = 0; b < nb_; ++b) {
        mu_aff += std::real(((x_[ub(b)] + apa * dxa[ub(b)]) * (z_[ub(b)] + ada * dza[ub(b)])).trace());
      }
      mu_aff /= total_dim;
      const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

      // corrector
      for (int b = 0; b < nb_; ++b) {
        rc[ub(b)] = sigma * mu * zinv[ub(b)] - x_[ub(b)] - dxa[ub(b)] * dza[ub(b)] * zinv[ub(b)];
      }
      rcs = RVec::Constant(m_, sigma * mu) - s_.cwiseProduct(zs_) - dsa.cwiseProduct(dzsa);
      std::vector<CMat> dx;
      std::vector<CMat> dz;
      RVec ds;
      RVec dy;
      RVec dzs;
      direction(rc, rcs, dx, dz, ds, dy, dzs);
      auto [ap, ad] = steps(dx, dz, ds, dzs);
      ap = std::min(1.0, opt_.step_fraction * ap);
      ad = std::min(1.0, opt_.step_fraction * ad);
      if (!(ap > 1e-14 && ad > 1e-14) || !dy.allFinite()) {
        status = SolverStatus::NumericalFailure;
        break;
      }
      for (int b = 0; b < nb_; ++b) {
        x_[ub(b)] = herm(x_[ub(b)] + ap * dx[ub(b)]);
        z_[ub(b)] = herm(z_[ub(b)] + ad * dz[ub(b)]);
      }
      s_ += ap * ds;
      y_ += ad * dy;
      zs_ += ad * dzs;
    }

    res.x = x_;
    res.dual = (c_scale_ * y_).cwiseQuotient(row_scale_);
    double pobj = 0.0;
    for (int b = 0; b < nb_; ++b) pobj += std::real((c_[ub(b)] * x_[ub(b)]).trace());
    res.primal_objective = pobj * c_scale_;
    res.dual_objective = rhs_.dot(y_) * c_scale_;
    res.report.status = status;
    res.report.iterations = iter;
    res.report.gap = relgap;
    res.report.residual = std::max(pinf, dinf);
    res.report.objective = res.primal_objective;
    for (const auto& t : trace_) res.report.trajectory.push_back(t.primal_objective);
    res.trace = std::move(trace_);
    res.report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return res;
  }

 private:
  static std::size_t ub(int k) { return static_cast<std::size_t>(k); }
  static std::size_t ub(Eigen::Index k) { return static_cast<std::size_t>(k); }

  RVec apply_block(int b, const CMat& xb) const {
    RVec out = RVec::Zero(m_);
    const auto& bv = blocks_[ub(b)];
    for (Eigen::Index r = 0; r < bv.v.cols(); ++r) {
      out(bv.owner[ub(r)]) += bv.w(r) * std::real(bv.v.col(r).dot(xb * bv.v.col(r)));
    }
    return out;
  }

  RVec apply(const std::vector<CMat>& x) const {
    RVec out = RVec::Zero(m_);
    for (int b = 0; b < nb_; ++b) out += apply_block(b, x[ub(b)]);
    return out;
  }

  CMat adjoint(int b, const RVec& y) const {
    const auto& bv = blocks_[ub(b)];
    RVec coef(bv.v.cols());
    for (Eigen::Index r = 0; r < bv.v.cols(); ++r) coef(r) = bv.w(r) * y(bv.owner[ub(r)]);
    return bv.v * coef.cast<cdouble>().asDiagonal() * bv.v.adjoint();
  }

  void init() {
    x_.clear();
    z_.clear();
    double a_max = 0.0;
    for (int b = 0; b < nb_; ++b) {
      const auto d = static_cast<double>(c_[ub(b)].rows());
      double amax_b = 0.0;
      double ratio = 0.0;
      RVec per_con = RVec::Zero(m_);
      const auto& bv = blocks_[ub(b)];
      for (Eigen::Index r = 0; r < bv.v.cols(); ++r) {
        per_con(bv.owner[ub(r)]) += std::abs(bv.w(r)) * bv.v.col(r).squaredNorm();
      }
      for (int m = 0; m < m_; ++m) {
        amax_b = std::max(amax_b, per_con(m));
        ratio = std::max(ratio, (1.0 + std::abs(rhs_(m))) / (1.0 + per_con(m)));
      }
      a_max = std::max(a_max, amax_b);
      const double xi = std::max({10.0, std::sqrt(d), d * ratio});
      const double eta = std::max({10.0, std::sqrt(d), amax_b, c_[ub(b)].norm()});
      const Eigen::Index n = c_[ub(b)].rows();
      x_.push_back(xi * CMat::Identity(n, n));
      z_.push_back(eta * CMat::Identity(n, n));
    }
    const double xs = std::max(10.0, rhs_.size() ? rhs_.cwiseAbs().maxCoeff() : 0.0);
    s_ = RVec::Constant(m_, xs);
    zs_ = RVec::Constant(m_, std::max(10.0, a_max));
    y_ = RVec::Zero(m_);
  }

  // Large dual iterate along a direction d >= 0 with r^T d > 0 and A*(d) <= 0.
  bool dual_ray() const {
    const double ny = y_.norm();
    if (!(ny > 1e7)) return false;
    const RVec d = y_ / ny;
    const double rd = rhs_.dot(d);
    if (!(rd > 0.0)) return false;
    if (d.minCoeff() < -1e-6 * rd) return false;
    for (int b = 0; b < nb_; ++b) {
      const CMat a = adjoint(b, d);
      const double lmax =
          Eigen::SelfAdjointEigenSolver<CMat>(a, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
      if (lmax > 1e-6 * rd) return false;
    }
    return true;
  }

  SdpOptions opt_;
  int nb_ = 0;
  int m_ = 0;
  double c_scale_ = 1.0;
  std::vector<CMat> c_;
  RVec row_scale_;
  RVec rhs_;
  std::vector<BlockVectors> blocks_;
  std::vector<CMat> x_;
  std::vector<CMat> z_;
  RVec s_;
  RVec y_;
  RVec zs_;
  std::vector<SdpIterate> trace_;
};

}  // namespace

SdpResult solve_sdp(const SdpProblem& problem, const SdpOptions& options) {
  problem.validate();
  Solver solver(problem, options);
  return solver.run();
}

}  // namespace mcbf
