#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "hybridest/numerics.hpp"
#include "hybridest/rng.hpp"

namespace hybridest {

/// Spatial channel covariance R with tr(R) = M, PSD within -1e-10, and a
/// cached descending eigensystem plus PSD square root.
class SpatialCovariance {
 public:
  explicit SpatialCovariance(HermitianMatrix r);

  /// Rescales the trace to M before construction.
  static SpatialCovariance normalized(const HermitianMatrix& r);

  int dim() const { return r_.dim(); }
  const HermitianMatrix& matrix() const { return r_; }
  const EigenSystem& eig() const { return eig_; }
  const Eigen::MatrixXcd& sqrt() const { return sqrt_; }

 private:
  HermitianMatrix r_;
  EigenSystem eig_;
  Eigen::MatrixXcd sqrt_;
};

struct ChannelRealization {
  Eigen::VectorXcd g;
};

/// Exponential correlation model [R]_{m,n} = a^|m-n|, 0 <= a < 1.
SpatialCovariance exp_covariance(int m, double a);

/// Ray-based covariance for a half-wavelength uniform linear array:
/// num_paths steering outer products with Laplacian-distributed angles
/// (std dev angle_spread) around mean_angle, trace-normalized to M.
SpatialCovariance ray_covariance(int m, int num_paths, double angle_spread,
                                 double mean_angle, std::uint64_t rng_seed);

/// g = R^{1/2} h with h ~ CN(0, I_M).
ChannelRealization sample_channel(const SpatialCovariance& cov, RngStream& rng);

/// Definition of "more spatially correlated": eigenvalues of c1 majorize
/// those of c2.
bool more_correlated(const SpatialCovariance& c1, const SpatialCovariance& c2);

}  // namespace hybridest
