#pragma once

#include <cstdint>
#include <memory>

#include <Eigen/Dense>

#include "hybridest/combiner.hpp"

namespace hybridest {

/// Dimensional/power parameters of one estimation configuration. Noise is
/// unit-variance, so rho doubles as the linear SNR.
struct TrainingScenario {
  int m;
  int l;
  int t;
  double rho;

  TrainingScenario(int m_, int l_, int t_, double rho_);
};

/// F_c (stacked combiners, TL x M), F_d (blockdiag, TL x TM) and the noise
/// shaping R_Fd = F_d F_d^H of one combiner set.
struct StackedCombiners {
  Eigen::MatrixXcd f_c;
  Eigen::MatrixXcd f_d;
  Eigen::MatrixXcd r_fd;
  int m = 0;
  int l = 0;
  int t = 0;
};

StackedCombiners stack_combiners(const CombinerSet& set);

struct ObservationBatch {
  Eigen::VectorXcd y_c;
  std::shared_ptr<const StackedCombiners> stack;
};

/// y_c = sqrt(rho) F_c g + F_d n_c with n_c ~ CN(0, I_TM); with_noise = false
/// zeroes the noise term (and skips the draws).
ObservationBatch stack_observations(std::shared_ptr<const StackedCombiners> stack,
                                    const ChannelRealization& g,
                                    const TrainingScenario& scenario, RngStream& rng,
                                    bool with_noise = true);
ObservationBatch stack_observations(const CombinerSet& set, const ChannelRealization& g,
                                    const TrainingScenario& scenario, RngStream& rng,
                                    bool with_noise = true);

/// Wiener filter W = sqrt(rho) R F_c^H (rho F_c R F_c^H + R_Fd)^{-1}.
/// The estimate is g_hat = W y_c.
Eigen::MatrixXcd wiener_filter(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                               const Eigen::MatrixXcd& f_d, double rho);

/// Same, with R_Fd supplied directly (pass zero for a noiseless model).
Eigen::MatrixXcd wiener_filter_rfd(const SpatialCovariance& cov,
                                   const Eigen::MatrixXcd& f_c,
                                   const Eigen::MatrixXcd& r_fd, double rho);

/// MMSE of the Wiener estimate: tr((R^{-1} + rho F_c^H R_Fd^{-1} F_c)^{-1}),
/// falling back to the pre-Woodbury form when R is rank deficient.
double analytic_mse(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                    const Eigen::MatrixXcd& f_d, double rho);
double analytic_mse_rfd(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                        const Eigen::MatrixXcd& r_fd, double rho);

/// Closed form for the single-training optimum: M - sum_l lambda_l^2/(lambda_l + 1/rho).
/// Requires lambdas sorted descending and summing to M.
double analytic_mse_single_optimal(const Eigen::VectorXd& lambdas, int l, double rho);

/// Fully-digital single-training reference: sum_l lambda_l/(1 + rho lambda_l).
double fully_digital_reference(const SpatialCovariance& cov, double rho);

struct NmseEstimate {
  double nmse = 0.0;     // mean of |g - g_hat|^2 / M
  double std_err = 0.0;  // standard error of that mean
  long trials = 0;
};

/// Monte Carlo NMSE over `trials` channel/noise realizations. Per-trial RNG
/// streams derive from (seed, trial index), and the reduction is index-ordered,
/// so the result is identical for any thread count. threads = 0 uses the
/// OpenMP default.
NmseEstimate empirical_nmse(const CombinerSet& set, const SpatialCovariance& cov,
                            const TrainingScenario& scenario, long trials,
                            std::uint64_t seed, int threads = 0,
                            bool with_noise = true);

/// Serial reference implementation of empirical_nmse; kept for testing and
/// benchmarking against the parallel kernel.
NmseEstimate empirical_nmse_serial(const CombinerSet& set, const SpatialCovariance& cov,
                                   const TrainingScenario& scenario, long trials,
                                   std::uint64_t seed, bool with_noise = true);

/// Monte Carlo NMSE when the receiver's covariance belief differs from the
/// channel statistics: channels come from `truth`, the Wiener filter is built
/// from `design`.
NmseEstimate empirical_nmse_mismatched(const CombinerSet& set,
                                       const SpatialCovariance& truth,
                                       const SpatialCovariance& design,
                                       const TrainingScenario& scenario, long trials,
                                       std::uint64_t seed, int threads = 0,
                                       bool with_noise = true);

}  // namespace hybridest
