#pragma once

#include <Eigen/Dense>

#include "hybridest/errors.hpp"

namespace hybridest {

/// Dense complex matrix with exact conjugate symmetry. Construction checks the
/// input against a 1e-12 tolerance, then stores the exact Hermitian part so
/// downstream code never sees drift.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(const Eigen::MatrixXcd& m);

  /// (m + m^H)/2 without the construction tolerance check, for results that
  /// are Hermitian analytically but carry rounding noise.
  static HermitianMatrix symmetrized(const Eigen::MatrixXcd& m);

  static HermitianMatrix identity(int dim);

  int dim() const { return static_cast<int>(entries_.rows()); }
  const Eigen::MatrixXcd& entries() const { return entries_; }

 private:
  struct Exact {};
  HermitianMatrix(Eigen::MatrixXcd m, Exact) : entries_(std::move(m)) {}

  Eigen::MatrixXcd entries_;
};

/// Eigenvalues sorted descending; column k of `vectors` pairs with values[k].
struct EigenSystem {
  Eigen::VectorXd values;
  Eigen::MatrixXcd vectors;
};

/// Hermitian eigendecomposition with orthonormal vectors.
EigenSystem eigh(const HermitianMatrix& h);

/// Generalized eigenpairs of the Hermitian-definite pencil (a, b), solved by
/// B^{-1/2} whitening. Vectors are B-orthonormal and sorted by descending
/// eigenvalue. Throws DomainError if b is not positive definite.
EigenSystem gen_eigh_pencil(const HermitianMatrix& a, const HermitianMatrix& b);

/// Block generalized Rayleigh quotient tr((V^H B V)^{-1} V^H A V).
/// Throws DomainError if v is column-rank deficient.
double block_grq(const Eigen::MatrixXcd& v, const HermitianMatrix& a,
                 const HermitianMatrix& b);

/// Hermitian PSD square root; eigenvalues in [-1e-6, 0) are clipped to zero,
/// anything below -1e-6 is rejected.
Eigen::MatrixXcd sqrt_psd(const HermitianMatrix& r);

/// Weak majorization test x > y on equal-sum vectors (prefix sums of the
/// descending sorts dominate). Reflexive by construction.
bool majorizes(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace hybridest
