#include "hybridest/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridest {

namespace {

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd& m) {
  Eigen::MatrixXcd h = 0.5 * (m + m.adjoint());
  for (Eigen::Index i = 0; i < h.rows(); ++i) h(i, i) = std::real(h(i, i));
  return h;
}

}  // namespace

HermitianMatrix::HermitianMatrix(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("HermitianMatrix: input must be square and non-empty");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double dev = (m - m.adjoint().eval()).cwiseAbs().maxCoeff();
  if (dev > 2e-12 * scale) {
    throw DomainError("HermitianMatrix: input is not conjugate-symmetric (deviation " +
                      std::to_string(dev) + ")");
  }
  entries_ = hermitian_part(m);
}

HermitianMatrix HermitianMatrix::symmetrized(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError("HermitianMatrix::symmetrized: input must be square");
  }
  return HermitianMatrix(hermitian_part(m), Exact{});
}

HermitianMatrix HermitianMatrix::identity(int dim) {
  return HermitianMatrix(Eigen::MatrixXcd::Identity(dim, dim), Exact{});
}

EigenSystem eigh(const HermitianMatrix& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h.entries());
  if (solver.info() != Eigen::Success) {
    throw NumericalError("eigh: decomposition did not converge");
  }
  // Eigen returns ascending order.
  const Eigen::Index n = h.dim();
  EigenSystem out;
  out.values = solver.eigenvalues().reverse();
  out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.vectors.col(k) = solver.eigenvectors().col(n - 1 - k);
  }
  return out;
}

EigenSystem gen_eigh_pencil(const HermitianMatrix& a, const HermitianMatrix& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("gen_eigh_pencil: operand dimensions differ");
  }
  const EigenSystem eb = eigh(b);
  if (eb.values.minCoeff() <= 1e-12) {
    throw DomainError("gen_eigh_pencil: B is not positive definite (min eigenvalue " +
                      std::to_string(eb.values.minCoeff()) + ")");
  }
  const Eigen::VectorXd inv_sqrt = eb.values.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXcd b_inv_half =
      eb.vectors * inv_sqrt.asDiagonal() * eb.vectors.adjoint();
  const HermitianMatrix whitened =
      HermitianMatrix::symmetrized(b_inv_half * a.entries() * b_inv_half);
  EigenSystem sys = eigh(whitened);
  sys.vectors = b_inv_half * sys.vectors;  // B-orthonormal
  return sys;
}

double block_grq(const Eigen::MatrixXcd& v, const HermitianMatrix& a,
                 const HermitianMatrix& b) {
  if (v.rows() != a.dim() || a.dim() != b.dim()) {
    throw DimensionError("block_grq: dimension mismatch");
  }
  if (v.cols() < 1 || v.cols() > v.rows()) {
    throw DimensionError("block_grq: V must be tall with at least one column");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(v);
  qr.setThreshold(1e-10);
  if (qr.rank() < v.cols()) {
    throw DomainError("block_grq: V is column-rank deficient");
  }
  const Eigen::MatrixXcd vbv = v.adjoint() * b.entries() * v;
  const Eigen::MatrixXcd vav = v.adjoint() * a.entries() * v;
  const Eigen::LDLT<Eigen::MatrixXcd> ldlt(vbv);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError("block_grq: V^H B V factorization failed");
  }
  return std::real((ldlt.solve(vav)).trace());
}

Eigen::MatrixXcd sqrt_psd(const HermitianMatrix& r) {
  EigenSystem sys = eigh(r);
  if (sys.values.minCoeff() < -1e-6) {
    throw DomainError("sqrt_psd: matrix is not PSD (min eigenvalue " +
                      std::to_string(sys.values.minCoeff()) + ")");
  }
  const Eigen::VectorXd clipped = sys.values.cwiseMax(0.0);
  return hermitian_part(sys.vectors * clipped.cwiseSqrt().asDiagonal() *
                        sys.vectors.adjoint());
}

bool majorizes(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) {
    throw DimensionError("majorizes: vectors have different lengths");
  }
  const double sx = x.sum();
  const double sy = y.sum();
  if (std::abs(sx - sy) > 1e-9 * std::max({1.0, std::abs(sx), std::abs(sy)})) {
    throw DomainError("majorizes: vector sums differ beyond tolerance");
  }
  std::vector<double> xs(x.data(), x.data() + x.size());
  std::vector<double> ys(y.data(), y.data() + y.size());
  std::sort(xs.begin(), xs.end(), std::greater<>());
  std::sort(ys.begin(), ys.end(), std::greater<>());
  double px = 0.0, py = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    px += xs[i];
    py += ys[i];
    if (px < py - 1e-12 * std::max({1.0, std::abs(px), std::abs(py)})) return false;
  }
  return true;
}

}  // namespace hybridest
