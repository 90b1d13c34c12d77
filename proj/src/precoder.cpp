#include <cmath>

#include "hybridest/harness.hpp"

namespace hybridest {

HybridPrecoder phased_zf_precoder(const Eigen::MatrixXcd& h_hat, int l, int quant_bits) {
  const int m = static_cast<int>(h_hat.rows());
  const int k = static_cast<int>(h_hat.cols());
  if (k < 1 || k > l || l > m) {
    throw DimensionError("phased_zf_precoder: need 1 <= K <= L <= M");
  }
  HybridPrecoder p;
  p.analog.resize(m, l);
  // Beam column k keeps each antenna's phase aligned with the estimated
  // channel under the h^H coupling convention, so |h^H f| = sum |h_m| for
  // perfect estimates (equal-gain combining).
  for (int c = 0; c < k; ++c) {
    for (int r = 0; r < m; ++r) {
      const std::complex<double> z = h_hat(r, c);
      const double mag = std::abs(z);
      p.analog(r, c) = mag == 0.0 ? 1.0 : z / mag;
    }
  }
  for (int c = k; c < l; ++c) {
    for (int r = 0; r < m; ++r) {
      p.analog(r, c) = std::polar(1.0, -2.0 * M_PI * r * c / m);
    }
  }
  if (quant_bits >= 1) {
    Combiner shim;
    shim.entries = p.analog.adjoint();
    shim.mode = PhaseMode::phase_only;
    p.analog = quantize_phases(shim, quant_bits).entries.adjoint();
  }

  // Zero-forcing baseband on the effective channel the BS believes in.
  const Eigen::MatrixXcd h_eff = h_hat.adjoint() * p.analog;  // K x L
  const Eigen::MatrixXcd gram = h_eff * h_eff.adjoint();      // K x K
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(gram);
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  if (ldlt.info() != Eigen::Success || d.minCoeff() < 1e-12 * std::max(1.0, d.maxCoeff())) {
    // Rank-deficient effective channel: diagonal loading keeps the solve finite.
    const double load = 1e-9 * std::max(1.0, std::real(gram.trace()));
    ldlt.compute(gram + load * Eigen::MatrixXcd::Identity(k, k));
    p.regularized = true;
  }
  p.baseband = ldlt.solve(h_eff).adjoint();  // L x K right pseudo-inverse

  const double norm = (p.analog * p.baseband).norm();
  if (!(norm > 0.0)) throw NumericalError("phased_zf_precoder: zero precoder");
  p.baseband /= norm;
  return p;
}

double sum_spectral_efficiency(const Eigen::MatrixXcd& h_true,
                               const HybridPrecoder& precoder, double rho) {
  if (h_true.rows() != precoder.analog.rows() ||
      h_true.cols() != precoder.baseband.cols()) {
    throw DimensionError("sum_spectral_efficiency: dimension mismatch");
  }
  if (rho < 0.0) throw DomainError("sum_spectral_efficiency: rho must be >= 0");
  const Eigen::MatrixXcd coupling = h_true.adjoint() * precoder.composite();  // K x K
  const int k = static_cast<int>(h_true.cols());
  double se = 0.0;
  for (int i = 0; i < k; ++i) {
    const double signal = std::norm(coupling(i, i));
    double interference = 0.0;
    for (int j = 0; j < k; ++j) {
      if (j != i) interference += std::norm(coupling(i, j));
    }
    se += std::log2(1.0 + rho * signal / (1.0 + rho * interference));
  }
  return se;
}

}  // namespace hybridest
