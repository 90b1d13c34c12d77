// The OpenMP kernels must reproduce the serial reference bit for bit: trial
// streams are derived from the trial index and the reduction is index-ordered.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hybridest/harness.hpp"
#include "test_util.hpp"

using namespace hybridest;

TEST_CASE("empirical_nmse: serial reference equals OpenMP for any team size") {
  const SpatialCovariance cov = exp_covariance(32, 0.8);
  const CombinerSet set = design_sequential(cov, 4, 4, 2.0);
  const TrainingScenario scenario(32, 4, 4, 2.0);
  const long trials = 3000;
  const NmseEstimate ref = empirical_nmse_serial(set, cov, scenario, trials, 123);
  for (int threads : {1, 2, 3, 4}) {
    const NmseEstimate par = empirical_nmse(set, cov, scenario, trials, 123, threads);
    CHECK(par.nmse == ref.nmse);
    CHECK(par.std_err == ref.std_err);
    CHECK(par.trials == ref.trials);
  }
}

TEST_CASE("run_se_point: serial reference equals OpenMP for any team size") {
  SweepConfig cfg;
  cfg.m = 16;
  cfg.l = 4;
  cfg.t = 4;
  cfg.k = 4;
  cfg.a = 0.8;
  const auto covs = user_covariances(cfg);
  const CombinerSet applied = constrain_combiners(
      design_combiners(DesignMethod::sequential, *covs[0], cfg, 5.0), cfg);
  const auto stack = std::make_shared<const StackedCombiners>(stack_combiners(applied));
  const Eigen::MatrixXcd w = wiener_filter_rfd(*covs[0], stack->f_c, stack->r_fd, 5.0);
  std::vector<SeUserPipeline> users;
  for (int u = 0; u < cfg.k; ++u) users.push_back({covs[u], stack, w, 5.0});

  SePointConfig point;
  point.rho = 5.0;
  point.l = cfg.l;
  point.trials = 1000;
  point.seed = 9;
  const SePointResult ref = run_se_point_serial(users, point);
  for (int threads : {1, 2, 4}) {
    point.threads = threads;
    const SePointResult par = run_se_point(users, point);
    CHECK(par.se_estimated == ref.se_estimated);
    CHECK(par.se_perfect == ref.se_perfect);
    CHECK(par.nmse == ref.nmse);
    CHECK(par.nmse_std_err == ref.nmse_std_err);
  }
}

TEST_CASE("concurrent covariance accumulation merges to the sequential fold") {
  const SpatialCovariance truth = exp_covariance(16, 0.7);
  const CombinerSet training = dft_covest_combiners(16, 4);
  const auto stack = std::make_shared<const StackedCombiners>(stack_combiners(training));
  const TrainingScenario scenario(16, 4, 4, 10.0);

  const long n = 64;
  SampleCovariance full(16);
  SampleCovariance chunk_a(16), chunk_b(16);
  for (long i = 0; i < n; ++i) {
    RngStream ch(31, static_cast<std::uint64_t>(i), purpose::covest_channel);
    RngStream nz(31, static_cast<std::uint64_t>(i), purpose::covest_noise);
    const ChannelRealization g = sample_channel(truth, ch);
    const Eigen::VectorXcd y = stack_observations(stack, g, scenario, nz).y_c;
    full.accumulate(y);
    (i < n / 2 ? chunk_a : chunk_b).accumulate(y);
  }
  const SampleCovariance merged = SampleCovariance::merge(chunk_a, chunk_b);
  CHECK(merged.count() == full.count());
  CHECK((merged.mean().entries() - full.mean().entries()).cwiseAbs().maxCoeff() <= 1e-12);
}
