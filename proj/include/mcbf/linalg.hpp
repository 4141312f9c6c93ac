// SPDX-License-Identifier: Apache-2.0
//
// Dense complex linear algebra shared by all solver modules. Matrices are
// Eigen column-major containers; Hermitian matrices are never inverted
// explicitly, every R^{-1} X product goes through a Cholesky factor.
#pragma once

#include <complex>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace mcbf {

using cdouble = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

/// max|A - A^H| <= tol * max|A|.
bool is_hermitian(const CMat& a, double tol = 1e-12);

/// Cholesky factor of a Hermitian positive-definite matrix. Throws
/// Error(NotPositiveDefinite) on a nonpositive pivot.
class HermitianFactor {
 public:
  explicit HermitianFactor(const CMat& a);

  CMat solve(const CMat& b) const;
  CVec solve(const CVec& b) const;
  Eigen::Index dim() const { return llt_.rows(); }

 private:
  Eigen::LLT<CMat> llt_;
};

/// Solves A X = B for Hermitian positive-definite A.
CMat hermitian_solve(const CMat& a, const CMat& b);

struct RangeBasis {
  CMat u;        // N x r, orthonormal columns
  int rank = 0;  // numerical rank
};

/// Orthonormal basis of range(H); singular values below tol * sigma_max are
/// treated as zero. Throws Error(ZeroMatrix) when ||H||_F = 0.
RangeBasis orthonormal_range(const CMat& h, double tol = 1e-10);

// Complex <-> real lifting with [Re; Im] stacking:
//   z^H A z  ==  lift(z)^T lift_hermitian(A) lift(z)
//   Re{z^H c} == lift(z)^T lift(c)
RVec lift_vector(const CVec& z);
CVec unlift_vector(const RVec& x);
RMat lift_hermitian(const CMat& a);

/// Smallest eigenvalue of a Hermitian matrix.
double min_eigenvalue(const CMat& a);

}  // namespace mcbf
