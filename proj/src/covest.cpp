#include "hybridest/covest.hpp"

#include <cmath>
#include <string>

namespace hybridest {

Eigen::MatrixXcd dft_training_matrix(int m) {
  if (m < 1) throw DomainError("dft_training_matrix: M must be >= 1");
  Eigen::MatrixXcd f(m, m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < m; ++c) {
      f(r, c) = std::polar(1.0, -2.0 * M_PI * r * c / m);
    }
  }
  return f;
}

CombinerSet dft_covest_combiners(int m, int l) {
  if (l < 1 || m % l != 0) {
    throw DomainError("dft_covest_combiners: L must divide M (T = M/L trainings)");
  }
  const Eigen::MatrixXcd f = dft_training_matrix(m);
  CombinerSet set;
  set.method = DesignMethod::dft_random;
  const int t = m / l;
  for (int tt = 0; tt < t; ++tt) {
    Combiner c;
    c.entries = f.middleRows(static_cast<Eigen::Index>(tt) * l, l);
    c.mode = PhaseMode::phase_only;
    set.combiners.push_back(std::move(c));
  }
  return set;
}

SampleCovariance::SampleCovariance(int dim) {
  if (dim < 1) throw DomainError("SampleCovariance: dimension must be >= 1");
  sum_ = Eigen::MatrixXcd::Zero(dim, dim);
}

void SampleCovariance::accumulate(const Eigen::VectorXcd& y) {
  if (y.size() != sum_.rows()) {
    throw DimensionError("SampleCovariance::accumulate: dimension mismatch");
  }
  sum_.noalias() += y * y.adjoint();
  ++count_;
}

SampleCovariance SampleCovariance::merge(const SampleCovariance& a,
                                         const SampleCovariance& b) {
  if (a.dim() != b.dim()) {
    throw DimensionError("SampleCovariance::merge: dimension mismatch");
  }
  SampleCovariance out(a.dim());
  out.sum_ = a.sum_ + b.sum_;
  out.count_ = a.count_ + b.count_;
  return out;
}

HermitianMatrix SampleCovariance::mean() const {
  if (count_ == 0) throw DomainError("SampleCovariance: no samples accumulated");
  return HermitianMatrix::symmetrized(sum_ / static_cast<double>(count_));
}

HermitianMatrix recover_channel_cov(const HermitianMatrix& r_yc,
                                    const Eigen::MatrixXcd& f_c,
                                    const Eigen::MatrixXcd& f_d, double rho) {
  if (f_c.rows() != f_c.cols() || f_c.rows() != r_yc.dim()) {
    throw DimensionError("recover_channel_cov: F_c must be square and match R_yc");
  }
  if (f_d.rows() != f_c.rows()) {
    throw DimensionError("recover_channel_cov: F_d row count mismatch");
  }
  if (!(rho > 0.0)) throw DomainError("recover_channel_cov: rho must be positive");
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(f_c);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-12)) {
    throw NumericalError("recover_channel_cov: F_c is singular (rcond " +
                         std::to_string(rcond) + ")");
  }
  const Eigen::MatrixXcd centered = r_yc.entries() - f_d * f_d.adjoint();
  // F_c^{-1} centered F_c^{-H} = solve(centered) with a second solve applied
  // from the right via the adjoint.
  const Eigen::MatrixXcd half = lu.solve(centered);
  const Eigen::MatrixXcd full = lu.solve(half.adjoint()).adjoint();
  return HermitianMatrix::symmetrized(full / rho);
}

HermitianMatrix recover_channel_cov(const SampleCovariance& sample,
                                    const Eigen::MatrixXcd& f_c,
                                    const Eigen::MatrixXcd& f_d, double rho) {
  return recover_channel_cov(sample.mean(), f_c, f_d, rho);
}

SpatialCovariance psd_project(const HermitianMatrix& r_raw) {
  EigenSystem sys = eigh(r_raw);
  const Eigen::VectorXd clipped = sys.values.cwiseMax(0.0);
  const double trace = clipped.sum();
  if (!(trace > 1e-12)) {
    throw DomainError("psd_project: matrix has no positive spectrum");
  }
  const double scale = static_cast<double>(r_raw.dim()) / trace;
  const Eigen::MatrixXcd rebuilt = sys.vectors * (scale * clipped).asDiagonal() *
                                   sys.vectors.adjoint();
  return SpatialCovariance(HermitianMatrix::symmetrized(rebuilt));
}

void validate(const CovEstConfig& cfg) {
  if (cfg.m < 1) throw DomainError("covest: M must be >= 1");
  if (cfg.l < 1 || cfg.m % cfg.l != 0) {
    throw DomainError("covest: L must divide M");
  }
  if (!(cfg.rho > 0.0)) throw DomainError("covest: rho must be positive");
  if (cfg.n_c < 1) throw DomainError("covest: N_c must be >= 1");
}

CovEstOutcome estimate_covariance(const SpatialCovariance& truth, const CovEstConfig& cfg,
                                  std::uint64_t seed, std::uint64_t user_tag,
                                  bool track_trajectory) {
  validate(cfg);
  if (truth.dim() != cfg.m) {
    throw DimensionError("estimate_covariance: truth dimension mismatch");
  }
  const CombinerSet training = dft_covest_combiners(cfg.m, cfg.l);
  const auto stack = std::make_shared<const StackedCombiners>(stack_combiners(training));
  const TrainingScenario scenario(cfg.m, cfg.l, cfg.m / cfg.l, cfg.rho);
  const double truth_norm = truth.matrix().entries().norm();

  SampleCovariance sample(cfg.m);
  CovEstOutcome out{truth, {}};
  for (long i = 0; i < cfg.n_c; ++i) {
    RngStream ch_rng(seed, static_cast<std::uint64_t>(i),
                     purpose::user(purpose::covest_channel, static_cast<int>(user_tag)));
    RngStream n_rng(seed, static_cast<std::uint64_t>(i),
                    purpose::user(purpose::covest_noise, static_cast<int>(user_tag)));
    const ChannelRealization g = sample_channel(truth, ch_rng);
    sample.accumulate(stack_observations(stack, g, scenario, n_rng).y_c);
    if (track_trajectory) {
      const HermitianMatrix raw =
          recover_channel_cov(sample, stack->f_c, stack->f_d, cfg.rho);
      const double err = (raw.entries() - truth.matrix().entries()).norm() / truth_norm;
      out.trajectory.push_back({i + 1, err});
    }
  }
  out.estimate =
      psd_project(recover_channel_cov(sample, stack->f_c, stack->f_d, cfg.rho));
  return out;
}

}  // namespace hybridest
