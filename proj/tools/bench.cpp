// Benchmark comparing the serial reference Monte Carlo kernels against the
// OpenMP ones, and checking that they produce identical results.
#include <chrono>
#include <cstdio>
#include <string>

#include <omp.h>

#include <CLI11.hpp>

#include "hybridest/harness.hpp"

namespace {

double ms_since(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                   start)
      .count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybridest kernel benchmark: serial reference vs OpenMP"};
  long trials = 10000;
  int threads = 0;
  app.add_option("--trials", trials, "Monte Carlo trials per kernel");
  app.add_option("--threads", threads, "Worker threads, 0 = auto");
  CLI11_PARSE(app, argc, argv);
  if (threads <= 0) threads = omp_get_max_threads();

  using namespace hybridest;
  const SpatialCovariance cov = exp_covariance(64, 0.8);
  const double rho = 10.0;

  std::printf("%-28s %10s %12s %12s %8s\n", "kernel", "trials", "serial_ms",
              "parallel_ms", "speedup");

  {
    const CombinerSet set = design_sequential(cov, 8, 8, rho);
    const TrainingScenario scenario(64, 8, 8, rho);
    auto t0 = std::chrono::steady_clock::now();
    const NmseEstimate ref = empirical_nmse_serial(set, cov, scenario, trials, 7);
    const double serial_ms = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const NmseEstimate par = empirical_nmse(set, cov, scenario, trials, 7, threads);
    const double parallel_ms = ms_since(t0);
    if (ref.nmse != par.nmse || ref.std_err != par.std_err) {
      std::fprintf(stderr, "mismatch between serial and parallel NMSE kernels\n");
      return 1;
    }
    std::printf("%-28s %10ld %12.1f %12.1f %7.2fx\n", "empirical_nmse M=64 T=8", trials,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
  }

  {
    SweepConfig cfg;
    cfg.k = 8;
    cfg.t = 8;
    const auto covs = user_covariances(cfg);
    const CombinerSet applied =
        constrain_combiners(design_combiners(DesignMethod::sequential, *covs[0], cfg, rho),
                            cfg);
    const auto stack = std::make_shared<const StackedCombiners>(stack_combiners(applied));
    const Eigen::MatrixXcd w = wiener_filter_rfd(*covs[0], stack->f_c, stack->r_fd, rho);
    std::vector<SeUserPipeline> users;
    for (int u = 0; u < cfg.k; ++u) users.push_back({covs[u], stack, w, rho});
    SePointConfig point;
    point.rho = rho;
    point.l = cfg.l;
    point.trials = trials;
    point.seed = 7;
    point.threads = threads;
    auto t0 = std::chrono::steady_clock::now();
    const SePointResult ref = run_se_point_serial(users, point);
    const double serial_ms = ms_since(t0);
    t0 = std::chrono::steady_clock::now();
    const SePointResult par = run_se_point(users, point);
    const double parallel_ms = ms_since(t0);
    if (ref.se_estimated != par.se_estimated || ref.se_perfect != par.se_perfect) {
      std::fprintf(stderr, "mismatch between serial and parallel SE kernels\n");
      return 1;
    }
    std::printf("%-28s %10ld %12.1f %12.1f %7.2fx\n", "se_point M=64 K=8 T=8", trials,
                serial_ms, parallel_ms, serial_ms / parallel_ms);
  }

  std::printf("threads: %d\n", threads);
  return 0;
}
