// SPDX-License-Identifier: Apache-2.0
#include "mcbf/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "mcbf/error.hpp"

namespace mcbf {

bool is_hermitian(const CMat& a, double tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = a.cwiseAbs().maxCoeff();
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol * scale;
}

HermitianFactor::HermitianFactor(const CMat& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "hermitian factor needs a square matrix");
  }
  llt_.compute(a);
  if (llt_.info() != Eigen::Success) {
    throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization hit a nonpositive pivot");
  }
}

CMat HermitianFactor::solve(const CMat& b) const {
  if (b.rows() != llt_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side row count differs from factor");
  }
  return llt_.solve(b);
}

CVec HermitianFactor::solve(const CVec& b) const {
  if (b.size() != llt_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "right-hand side length differs from factor");
  }
  return llt_.solve(b);
}

CMat hermitian_solve(const CMat& a, const CMat& b) { return HermitianFactor(a).solve(b); }

RangeBasis orthonormal_range(const CMat& h, double tol) {
  if (h.size() == 0 || h.norm() == 0.0) {
    throw Error(ErrorCode::ZeroMatrix, "orthonormal_range of a zero matrix");
  }
  Eigen::BDCSVD<CMat> svd(h, Eigen::ComputeThinU);
  const RVec& sv = svd.singularValues();
  const double cutoff = tol * sv(0);
  int rank = 0;
  while (rank < sv.size() && sv(rank) > cutoff) ++rank;
  return RangeBasis{svd.matrixU().leftCols(rank), rank};
}

RVec lift_vector(const CVec& z) {
  const Eigen::Index n = z.size();
  RVec x(2 * n);
  x.head(n) = z.real();
  x.tail(n) = z.imag();
  return x;
}

CVec unlift_vector(const RVec& x) {
  const Eigen::Index n = x.size() / 2;
  CVec z(n);
  z.real() = x.head(n);
  z.imag() = x.tail(n);
  return z;
}

RMat lift_hermitian(const CMat& a) {
  const Eigen::Index n = a.rows();
  RMat out(2 * n, 2 * n);
  out.topLeftCorner(n, n) = a.real();
  out.topRightCorner(n, n) = -a.imag();
  out.bottomLeftCorner(n, n) = a.imag();
  out.bottomRightCorner(n, n) = a.real();
  return out;
}

double min_eigenvalue(const CMat& a) {
  Eigen::SelfAdjointEigenSolver<CMat> es(a, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

}  // namespace mcbf
