#include "hybridest/channel.hpp"

#include <cmath>
#include <string>

namespace hybridest {

SpatialCovariance::SpatialCovariance(HermitianMatrix r)
    : r_(std::move(r)), eig_(eigh(r_)), sqrt_(sqrt_psd(r_)) {
  const double m = static_cast<double>(r_.dim());
  const double trace = std::real(r_.entries().trace());
  if (std::abs(trace - m) > 1e-9 * std::max(1.0, m)) {
    throw DomainError("SpatialCovariance: trace " + std::to_string(trace) +
                      " is not normalized to M = " + std::to_string(r_.dim()));
  }
  if (eig_.values.minCoeff() < -1e-10) {
    throw DomainError("SpatialCovariance: matrix is not PSD (min eigenvalue " +
                      std::to_string(eig_.values.minCoeff()) + ")");
  }
}

SpatialCovariance SpatialCovariance::normalized(const HermitianMatrix& r) {
  const double trace = std::real(r.entries().trace());
  if (!(trace > 0.0)) {
    throw DomainError("SpatialCovariance::normalized: non-positive trace");
  }
  const double scale = static_cast<double>(r.dim()) / trace;
  return SpatialCovariance(HermitianMatrix::symmetrized(scale * r.entries()));
}

SpatialCovariance exp_covariance(int m, double a) {
  if (m < 1) throw DomainError("exp_covariance: M must be positive");
  if (!(a >= 0.0 && a < 1.0)) {
    throw DomainError("exp_covariance: correlation coefficient must lie in [0, 1)");
  }
  Eigen::MatrixXcd r(m, m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      r(i, j) = std::pow(a, std::abs(i - j));
    }
  }
  return SpatialCovariance(HermitianMatrix(r));
}

SpatialCovariance ray_covariance(int m, int num_paths, double angle_spread,
                                 double mean_angle, std::uint64_t rng_seed) {
  if (m < 1) throw DomainError("ray_covariance: M must be positive");
  if (num_paths < 1) throw DomainError("ray_covariance: num_paths must be >= 1");
  if (angle_spread < 0.0) throw DomainError("ray_covariance: angle_spread must be >= 0");

  RngStream rng(rng_seed, 0, purpose::ray_angles);
  Eigen::MatrixXcd r = Eigen::MatrixXcd::Zero(m, m);
  Eigen::VectorXcd steer(m);
  for (int p = 0; p < num_paths; ++p) {
    // Laplacian with standard deviation angle_spread, inverse-CDF draw.
    const double u = rng.uniform() - 0.5;
    const double b = angle_spread / std::sqrt(2.0);
    const double theta =
        mean_angle - b * (u < 0 ? -1.0 : 1.0) * std::log(1.0 - 2.0 * std::abs(u));
    for (int i = 0; i < m; ++i) {
      steer(i) = std::polar(1.0, M_PI * i * std::sin(theta));
    }
    r.noalias() += steer * steer.adjoint();
  }
  return SpatialCovariance::normalized(HermitianMatrix::symmetrized(r));
}

ChannelRealization sample_channel(const SpatialCovariance& cov, RngStream& rng) {
  return ChannelRealization{cov.sqrt() * rng.cgaussian_vector(cov.dim())};
}

bool more_correlated(const SpatialCovariance& c1, const SpatialCovariance& c2) {
  if (c1.dim() != c2.dim()) {
    throw DimensionError("more_correlated: covariance dimensions differ");
  }
  return majorizes(c1.eig().values, c2.eig().values);
}

}  // namespace hybridest
