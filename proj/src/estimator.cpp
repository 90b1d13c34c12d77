#include "hybridest/estimator.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <omp.h>

namespace hybridest {

TrainingScenario::TrainingScenario(int m_, int l_, int t_, double rho_)
    : m(m_), l(l_), t(t_), rho(rho_) {
  if (m < 1 || l < 1 || l > m) {
    throw DimensionError("TrainingScenario: need 1 <= L <= M");
  }
  if (t < 1) throw DomainError("TrainingScenario: T must be >= 1");
  if (!(rho > 0.0)) throw DomainError("TrainingScenario: rho must be positive");
}

StackedCombiners stack_combiners(const CombinerSet& set) {
  validate(set);
  StackedCombiners s;
  s.t = set.trainings();
  s.l = static_cast<int>(set.combiners.front().rows());
  s.m = static_cast<int>(set.combiners.front().cols());
  s.f_c.resize(static_cast<Eigen::Index>(s.t) * s.l, s.m);
  s.f_d = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.t) * s.l,
                                 static_cast<Eigen::Index>(s.t) * s.m);
  s.r_fd = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(s.t) * s.l,
                                  static_cast<Eigen::Index>(s.t) * s.l);
  for (int tt = 0; tt < s.t; ++tt) {
    const Eigen::MatrixXcd& f = set.combiners[tt].entries;
    s.f_c.middleRows(static_cast<Eigen::Index>(tt) * s.l, s.l) = f;
    s.f_d.block(static_cast<Eigen::Index>(tt) * s.l, static_cast<Eigen::Index>(tt) * s.m,
                s.l, s.m) = f;
    s.r_fd.block(static_cast<Eigen::Index>(tt) * s.l, static_cast<Eigen::Index>(tt) * s.l,
                 s.l, s.l) = f * f.adjoint();
  }
  return s;
}

ObservationBatch stack_observations(std::shared_ptr<const StackedCombiners> stack,
                                    const ChannelRealization& g,
                                    const TrainingScenario& scenario, RngStream& rng,
                                    bool with_noise) {
  if (!stack) throw DomainError("stack_observations: null stack");
  if (stack->m != scenario.m || stack->l != scenario.l || stack->t != scenario.t) {
    throw DimensionError("stack_observations: combiner set does not match scenario");
  }
  if (g.g.size() != scenario.m) {
    throw DimensionError("stack_observations: channel dimension mismatch");
  }
  ObservationBatch batch;
  batch.stack = stack;
  batch.y_c = std::sqrt(scenario.rho) * (stack->f_c * g.g);
  if (with_noise) {
    batch.y_c.noalias() +=
        stack->f_d * rng.cgaussian_vector(static_cast<Eigen::Index>(scenario.t) * scenario.m);
  }
  return batch;
}

ObservationBatch stack_observations(const CombinerSet& set, const ChannelRealization& g,
                                    const TrainingScenario& scenario, RngStream& rng,
                                    bool with_noise) {
  return stack_observations(std::make_shared<const StackedCombiners>(stack_combiners(set)),
                            g, scenario, rng, with_noise);
}

namespace {

/// LDLT with a relative condition check on the block diagonal.
Eigen::LDLT<Eigen::MatrixXcd> checked_ldlt(const Eigen::MatrixXcd& a, const char* what) {
  Eigen::LDLT<Eigen::MatrixXcd> ldlt(a);
  if (ldlt.info() != Eigen::Success) {
    throw NumericalError(std::string(what) + ": factorization failed");
  }
  const Eigen::VectorXd d = ldlt.vectorD().cwiseAbs();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmax > 0.0) || dmin < 1e-14 * dmax) {
    throw NumericalError(std::string(what) + ": matrix is singular to working precision" +
                         " (diagonal ratio " + std::to_string(dmin / dmax) + ")");
  }
  return ldlt;
}

bool rank_deficient(const SpatialCovariance& cov) {
  const Eigen::VectorXd& v = cov.eig().values;
  return v.minCoeff() <= 1e-12 * std::max(1.0, v.maxCoeff());
}

}  // namespace

Eigen::MatrixXcd wiener_filter_rfd(const SpatialCovariance& cov,
                                   const Eigen::MatrixXcd& f_c,
                                   const Eigen::MatrixXcd& r_fd, double rho) {
  if (f_c.cols() != cov.dim() || r_fd.rows() != f_c.rows() || r_fd.cols() != f_c.rows()) {
    throw DimensionError("wiener_filter: dimension mismatch");
  }
  if (!(rho > 0.0)) throw DomainError("wiener_filter: rho must be positive");
  const Eigen::MatrixXcd& r = cov.matrix().entries();
  const Eigen::MatrixXcd inner = rho * f_c * r * f_c.adjoint() + r_fd;
  const auto ldlt = checked_ldlt(inner, "wiener_filter");
  // W = sqrt(rho) R F_c^H inner^{-1}; computed via the Hermitian transpose of
  // inner^{-1} (F_c R).
  return std::sqrt(rho) * ldlt.solve(f_c * r).adjoint();
}

Eigen::MatrixXcd wiener_filter(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                               const Eigen::MatrixXcd& f_d, double rho) {
  return wiener_filter_rfd(cov, f_c, f_d * f_d.adjoint(), rho);
}

double analytic_mse_rfd(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                        const Eigen::MatrixXcd& r_fd, double rho) {
  if (f_c.cols() != cov.dim() || r_fd.rows() != f_c.rows() || r_fd.cols() != f_c.rows()) {
    throw DimensionError("analytic_mse: dimension mismatch");
  }
  if (!(rho > 0.0)) throw DomainError("analytic_mse: rho must be positive");
  const Eigen::MatrixXcd& r = cov.matrix().entries();
  const Eigen::Index m = cov.dim();

  if (rank_deficient(cov)) {
    // Pre-Woodbury form tr(R - rho R F^H (rho F R F^H + R_Fd)^{-1} F R).
    const Eigen::MatrixXcd inner = rho * f_c * r * f_c.adjoint() + r_fd;
    const auto ldlt = checked_ldlt(inner, "analytic_mse(pre-Woodbury)");
    const Eigen::MatrixXcd fr = f_c * r;
    return std::real(r.trace()) - rho * std::real((fr.adjoint() * ldlt.solve(fr)).trace());
  }

  const auto noise_ldlt = checked_ldlt(r_fd, "analytic_mse(R_Fd)");
  const Eigen::MatrixXcd r_inv = cov.eig().vectors *
                                 cov.eig().values.cwiseInverse().asDiagonal() *
                                 cov.eig().vectors.adjoint();
  const Eigen::MatrixXcd info = r_inv + rho * f_c.adjoint() * noise_ldlt.solve(f_c);
  const auto ldlt = checked_ldlt(info, "analytic_mse");
  return std::real(ldlt.solve(Eigen::MatrixXcd::Identity(m, m)).trace());
}

double analytic_mse(const SpatialCovariance& cov, const Eigen::MatrixXcd& f_c,
                    const Eigen::MatrixXcd& f_d, double rho) {
  return analytic_mse_rfd(cov, f_c, f_d * f_d.adjoint(), rho);
}

double analytic_mse_single_optimal(const Eigen::VectorXd& lambdas, int l, double rho) {
  const Eigen::Index m = lambdas.size();
  if (l < 1 || l > m) throw DimensionError("analytic_mse_single_optimal: bad L");
  if (!(rho > 0.0)) throw DomainError("analytic_mse_single_optimal: rho must be positive");
  for (Eigen::Index i = 1; i < m; ++i) {
    if (lambdas(i) > lambdas(i - 1) + 1e-12) {
      throw DomainError("analytic_mse_single_optimal: spectrum not sorted descending");
    }
  }
  if (std::abs(lambdas.sum() - static_cast<double>(m)) > 1e-9 * std::max<double>(1, m)) {
    throw DomainError("analytic_mse_single_optimal: spectrum does not sum to M");
  }
  double captured = 0.0;
  for (int i = 0; i < l; ++i) {
    const double li = std::max(lambdas(i), 0.0);
    captured += li * li / (li + 1.0 / rho);
  }
  return static_cast<double>(m) - captured;
}

double fully_digital_reference(const SpatialCovariance& cov, double rho) {
  if (!(rho > 0.0)) throw DomainError("fully_digital_reference: rho must be positive");
  const Eigen::VectorXd& lambda = cov.eig().values;
  double mse = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double li = std::max(lambda(i), 0.0);
    mse += li / (1.0 + rho * li);
  }
  return mse;
}

namespace {

struct NmseContext {
  std::shared_ptr<const StackedCombiners> stack;
  const SpatialCovariance* cov;
  TrainingScenario scenario;
  Eigen::MatrixXcd wiener;
  std::uint64_t seed;
  bool with_noise;
};

double nmse_trial(const NmseContext& ctx, long trial) {
  RngStream ch_rng(ctx.seed, static_cast<std::uint64_t>(trial), purpose::channel);
  const ChannelRealization g = sample_channel(*ctx.cov, ch_rng);
  RngStream n_rng(ctx.seed, static_cast<std::uint64_t>(trial), purpose::noise);
  const ObservationBatch batch =
      stack_observations(ctx.stack, g, ctx.scenario, n_rng, ctx.with_noise);
  const Eigen::VectorXcd g_hat = ctx.wiener * batch.y_c;
  return (g.g - g_hat).squaredNorm() / static_cast<double>(ctx.scenario.m);
}

NmseEstimate reduce_nmse(const std::vector<double>& per_trial) {
  NmseEstimate est;
  est.trials = static_cast<long>(per_trial.size());
  double sum = 0.0;
  for (double v : per_trial) sum += v;  // index order, worker-count independent
  est.nmse = sum / static_cast<double>(est.trials);
  double sq = 0.0;
  for (double v : per_trial) sq += (v - est.nmse) * (v - est.nmse);
  if (est.trials > 1) {
    est.std_err = std::sqrt(sq / (static_cast<double>(est.trials) - 1.0) /
                            static_cast<double>(est.trials));
  }
  return est;
}

NmseContext make_context(const CombinerSet& set, const SpatialCovariance& truth,
                         const SpatialCovariance& design,
                         const TrainingScenario& scenario, std::uint64_t seed,
                         bool with_noise) {
  NmseContext ctx{std::make_shared<const StackedCombiners>(stack_combiners(set)),
                  &truth, scenario, {}, seed, with_noise};
  ctx.wiener = with_noise
                   ? wiener_filter_rfd(design, ctx.stack->f_c, ctx.stack->r_fd, scenario.rho)
                   : wiener_filter_rfd(design, ctx.stack->f_c,
                                       Eigen::MatrixXcd::Zero(ctx.stack->f_c.rows(),
                                                              ctx.stack->f_c.rows()),
                                       scenario.rho);
  return ctx;
}

}  // namespace

NmseEstimate empirical_nmse_mismatched(const CombinerSet& set,
                                       const SpatialCovariance& truth,
                                       const SpatialCovariance& design,
                                       const TrainingScenario& scenario, long trials,
                                       std::uint64_t seed, int threads, bool with_noise) {
  if (trials < 1) throw DomainError("empirical_nmse: trials must be >= 1");
  const NmseContext ctx = make_context(set, truth, design, scenario, seed, with_noise);
  std::vector<double> per_trial(static_cast<std::size_t>(trials));
  const int team = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (long i = 0; i < trials; ++i) {
    per_trial[static_cast<std::size_t>(i)] = nmse_trial(ctx, i);
  }
  return reduce_nmse(per_trial);
}

NmseEstimate empirical_nmse(const CombinerSet& set, const SpatialCovariance& cov,
                            const TrainingScenario& scenario, long trials,
                            std::uint64_t seed, int threads, bool with_noise) {
  return empirical_nmse_mismatched(set, cov, cov, scenario, trials, seed, threads,
                                   with_noise);
}

NmseEstimate empirical_nmse_serial(const CombinerSet& set, const SpatialCovariance& cov,
                                   const TrainingScenario& scenario, long trials,
                                   std::uint64_t seed, bool with_noise) {
  if (trials < 1) throw DomainError("empirical_nmse: trials must be >= 1");
  const NmseContext ctx = make_context(set, cov, cov, scenario, seed, with_noise);
  std::vector<double> per_trial(static_cast<std::size_t>(trials));
  for (long i = 0; i < trials; ++i) {
    per_trial[static_cast<std::size_t>(i)] = nmse_trial(ctx, i);
  }
  return reduce_nmse(per_trial);
}

}  // namespace hybridest
