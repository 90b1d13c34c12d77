#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "hybridest/estimator.hpp"

namespace hybridest {

/// Unnormalized M-point DFT matrix, entries exp(-j 2 pi m n / M).
Eigen::MatrixXcd dft_training_matrix(int m);

/// The covariance-training front end: F_c = DFT(M) cut into T = M/L blocks of
/// L rows, reused every coherence interval.
CombinerSet dft_covest_combiners(int m, int l);

/// Running mean of y y^H outer products. Hermitian by construction. Instances
/// may be accumulated independently and combined with merge().
class SampleCovariance {
 public:
  explicit SampleCovariance(int dim);

  void accumulate(const Eigen::VectorXcd& y);
  static SampleCovariance merge(const SampleCovariance& a, const SampleCovariance& b);

  int dim() const { return static_cast<int>(sum_.rows()); }
  long count() const { return count_; }
  /// The sample covariance accumulated so far. Throws if count() == 0.
  HermitianMatrix mean() const;

 private:
  Eigen::MatrixXcd sum_;
  long count_ = 0;
};

/// Inverts the received-signal statistics:
/// R = (1/rho) F_c^{-1} (R_yc - F_d F_d^H) F_c^{-H}, output symmetrized.
HermitianMatrix recover_channel_cov(const HermitianMatrix& r_yc,
                                    const Eigen::MatrixXcd& f_c,
                                    const Eigen::MatrixXcd& f_d, double rho);
HermitianMatrix recover_channel_cov(const SampleCovariance& sample,
                                    const Eigen::MatrixXcd& f_c,
                                    const Eigen::MatrixXcd& f_d, double rho);

/// Clips negative eigenvalues to zero and renormalizes the trace to M, making
/// a finite-sample recovery usable as a SpatialCovariance.
SpatialCovariance psd_project(const HermitianMatrix& r_raw);

struct CovEstConfig {
  int m = 64;
  int l = 8;       // must divide m; T = m/l trainings per interval
  double rho = 10.0;
  long n_c = 300;  // coherence intervals
};

void validate(const CovEstConfig& cfg);

struct CovTrajectoryPoint {
  long interval;
  double rel_frob_error;
};

struct CovEstOutcome {
  SpatialCovariance estimate;
  std::vector<CovTrajectoryPoint> trajectory;  // filled when tracking is on
};

/// Simulates n_c coherence intervals of DFT training against `truth`, then
/// recovers and projects the channel covariance. user_tag separates the RNG
/// streams of concurrent users. With track_trajectory, records the relative
/// Frobenius error of the raw recovery after every interval.
CovEstOutcome estimate_covariance(const SpatialCovariance& truth, const CovEstConfig& cfg,
                                  std::uint64_t seed, std::uint64_t user_tag = 0,
                                  bool track_trajectory = false);

}  // namespace hybridest
