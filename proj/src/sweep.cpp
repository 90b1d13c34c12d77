#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <omp.h>

#include "hybridest/harness.hpp"

namespace hybridest {

namespace {

constexpr double kDb = 10.0;

double to_db(double linear) { return kDb * std::log10(linear); }

double db_to_linear(double db) { return std::pow(10.0, db / kDb); }

/// Standard error of a dB-scale mean via the delta method.
double std_err_db(double mean_linear, double se_linear) {
  return kDb / std::log(10.0) * se_linear / mean_linear;
}

std::uint64_t user_seed(std::uint64_t seed, int k) {
  return splitmix64(seed ^ (0x75736572ULL + static_cast<std::uint64_t>(k)));
}

PhaseMode effective_mode(const SweepConfig& cfg) {
  return cfg.quant_bits >= 1 ? PhaseMode::quantized : cfg.phase_mode;
}

}  // namespace

CombinerSet design_combiners(DesignMethod method, const SpatialCovariance& cov,
                             const SweepConfig& cfg, double rho) {
  switch (method) {
    case DesignMethod::single_optimal:
      return single_optimal_set(cov, cfg.l, rho);
    case DesignMethod::block_selection:
      return design_block_selection(cov, cfg.l, cfg.t);
    case DesignMethod::sequential:
      return design_sequential(cov, cfg.l, cfg.t, rho);
    case DesignMethod::alternating:
      return design_alternating(cov, cfg.l, cfg.t, rho, cfg.epsilon, cfg.max_iter);
    case DesignMethod::dft_random: {
      RngStream rng(cfg.seed, 0, purpose::dft_rows);
      CombinerSet set;
      set.method = DesignMethod::dft_random;
      for (int tt = 0; tt < cfg.t; ++tt) {
        set.combiners.push_back(dft_random_columns(cov.dim(), cfg.l, rng));
      }
      return set;
    }
    case DesignMethod::fully_digital:
      return fully_digital_set(cov.dim());
  }
  throw DomainError("design_combiners: unknown method");
}

/// The hardware constraint applies to the phase-shifting network, never to
/// the fully-digital reference.
CombinerSet constrain_combiners(const CombinerSet& set, const SweepConfig& cfg) {
  if (set.method == DesignMethod::fully_digital) return set;
  return apply_phase_mode(set, effective_mode(cfg), cfg.quant_bits);
}

namespace {

SpatialCovariance model_covariance(const SweepConfig& cfg, double mean_deg, int user) {
  if (cfg.model == ChannelModel::exponential) return exp_covariance(cfg.m, cfg.a);
  return ray_covariance(cfg.m, cfg.ray_paths, cfg.ray_spread_deg * M_PI / 180.0,
                        mean_deg * M_PI / 180.0, user_seed(cfg.seed, user));
}

}  // namespace

SpatialCovariance single_user_covariance(const SweepConfig& cfg) {
  return model_covariance(cfg, cfg.ray_mean_deg, 0);
}

std::vector<std::shared_ptr<const SpatialCovariance>> user_covariances(
    const SweepConfig& cfg) {
  std::vector<std::shared_ptr<const SpatialCovariance>> covs;
  if (cfg.model == ChannelModel::exponential) {
    auto shared = std::make_shared<const SpatialCovariance>(exp_covariance(cfg.m, cfg.a));
    covs.assign(cfg.k, shared);
    return covs;
  }
  for (int k = 0; k < cfg.k; ++k) {
    // Users sit at distinct mean angles so the multi-user channel has full rank.
    const double offset =
        cfg.k == 1 ? 0.0 : -60.0 + 120.0 * static_cast<double>(k) / (cfg.k - 1);
    covs.push_back(std::make_shared<const SpatialCovariance>(
        model_covariance(cfg, cfg.ray_mean_deg + offset, k)));
  }
  return covs;
}

std::vector<SweepRecord> run_mse_sweep(const SweepConfig& cfg) {
  validate(cfg, /*se=*/false);
  const SpatialCovariance truth = model_covariance(cfg, cfg.ray_mean_deg, 0);

  std::vector<SweepRecord> records;
  for (DesignMethod method : cfg.methods) {
    for (double snr : cfg.snr_db) {
      const auto start = std::chrono::steady_clock::now();
      const double rho = db_to_linear(snr);
      SweepRecord rec;
      rec.method = to_string(method);
      rec.m = cfg.m;
      rec.k = cfg.k;
      rec.snr_db = snr;
      rec.trials = cfg.trials;
      rec.quant_bits = method == DesignMethod::fully_digital ? 0 : cfg.quant_bits;
      if (cfg.model == ChannelModel::exponential) rec.a = cfg.a;
      try {
        // The BS designs from the covariance it knows: the true one, or the
        // covest estimate when n_c > 0.
        std::shared_ptr<const SpatialCovariance> design_cov;
        if (cfg.n_c > 0 && method != DesignMethod::fully_digital) {
          const CovEstConfig cov_cfg{cfg.m, cfg.l, rho, cfg.n_c};
          design_cov = std::make_shared<const SpatialCovariance>(
              estimate_covariance(truth, cov_cfg, cfg.seed).estimate);
        }
        const SpatialCovariance& design_ref = design_cov ? *design_cov : truth;

        const CombinerSet applied = constrain_combiners(design_combiners(method, design_ref, cfg, rho), cfg);
        rec.phase_mode = to_string(applied.combiners.front().mode);
        rec.l = static_cast<int>(applied.combiners.front().rows());
        rec.t = applied.trainings();
        if (method == DesignMethod::alternating) rec.iters = applied.iterations;

        const TrainingScenario scenario(cfg.m, rec.l, rec.t, rho);
        if (!design_cov) {
          const StackedCombiners stack = stack_combiners(applied);
          rec.nmse_db_analytic =
              to_db(analytic_mse_rfd(truth, stack.f_c, stack.r_fd, rho) / cfg.m);
        }
        const NmseEstimate emp =
            empirical_nmse_mismatched(applied, truth, design_ref, scenario, cfg.trials,
                                      cfg.seed, cfg.threads);
        rec.nmse_db = to_db(emp.nmse);
        rec.std_err_db = std_err_db(emp.nmse, emp.std_err);
      } catch (const NumericalError& e) {
        rec.status = std::string("numerical_error: ") + e.what();
      } catch (const DomainError& e) {
        rec.status = std::string("domain_error: ") + e.what();
      }
      if (cfg.timing) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

struct SeTrialOutput {
  double se_estimated = 0.0;
  double se_perfect = 0.0;
  double nmse = 0.0;
};

SeTrialOutput se_trial(const std::vector<SeUserPipeline>& users, const SePointConfig& cfg,
                       long trial) {
  const int k = static_cast<int>(users.size());
  const int m = users.front().truth->dim();
  Eigen::MatrixXcd h_true(m, k);
  Eigen::MatrixXcd h_hat(m, k);
  double sq_err = 0.0;
  for (int u = 0; u < k; ++u) {
    const SeUserPipeline& pipe = users[u];
    RngStream ch_rng(cfg.seed, static_cast<std::uint64_t>(trial),
                     purpose::user(purpose::channel, u));
    const ChannelRealization g = sample_channel(*pipe.truth, ch_rng);
    h_true.col(u) = g.g;

    RngStream n_rng(cfg.seed, static_cast<std::uint64_t>(trial),
                    purpose::user(purpose::noise, u));
    Eigen::VectorXcd y = std::sqrt(pipe.train_rho) * (pipe.stack->f_c * g.g);
    y.noalias() += pipe.stack->f_d *
                   n_rng.cgaussian_vector(static_cast<Eigen::Index>(pipe.stack->t) * m);
    h_hat.col(u) = pipe.wiener * y;
    sq_err += (h_true.col(u) - h_hat.col(u)).squaredNorm();
  }
  SeTrialOutput out;
  out.se_estimated = sum_spectral_efficiency(
      h_true, phased_zf_precoder(h_hat, cfg.l, cfg.quant_bits), cfg.rho);
  out.se_perfect = sum_spectral_efficiency(
      h_true, phased_zf_precoder(h_true, cfg.l, cfg.quant_bits), cfg.rho);
  out.nmse = sq_err / (static_cast<double>(m) * k);
  return out;
}

struct MeanStdErr {
  double mean = 0.0;
  double std_err = 0.0;
};

MeanStdErr reduce(const std::vector<double>& values) {
  MeanStdErr out;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / n;
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - out.mean) * (v - out.mean);
    out.std_err = std::sqrt(sq / (n - 1.0) / n);
  }
  return out;
}

SePointResult reduce_se(const std::vector<SeTrialOutput>& per_trial) {
  std::vector<double> se_e, se_p, nm;
  se_e.reserve(per_trial.size());
  se_p.reserve(per_trial.size());
  nm.reserve(per_trial.size());
  for (const SeTrialOutput& t : per_trial) {
    se_e.push_back(t.se_estimated);
    se_p.push_back(t.se_perfect);
    nm.push_back(t.nmse);
  }
  const MeanStdErr a = reduce(se_e), b = reduce(se_p), c = reduce(nm);
  return SePointResult{a.mean, b.mean, a.std_err, b.std_err, c.mean, c.std_err};
}

void check_se_inputs(const std::vector<SeUserPipeline>& users, const SePointConfig& cfg) {
  if (users.empty()) throw DomainError("run_se_point: no users");
  if (static_cast<int>(users.size()) > cfg.l) {
    throw ConfigError("run_se_point: K must not exceed L");
  }
  if (cfg.trials < 1) throw DomainError("run_se_point: trials must be >= 1");
  for (const SeUserPipeline& pipe : users) {
    if (!pipe.truth || !pipe.stack) throw DomainError("run_se_point: null pipeline");
    if (!(pipe.train_rho > 0.0)) {
      throw DomainError("run_se_point: training rho must be positive");
    }
  }
}

}  // namespace

SePointResult run_se_point(const std::vector<SeUserPipeline>& users,
                           const SePointConfig& cfg) {
  check_se_inputs(users, cfg);
  std::vector<SeTrialOutput> per_trial(static_cast<std::size_t>(cfg.trials));
  const int team = cfg.threads > 0 ? cfg.threads : omp_get_max_threads();
#pragma omp parallel for schedule(static) num_threads(team)
  for (long i = 0; i < cfg.trials; ++i) {
    per_trial[static_cast<std::size_t>(i)] = se_trial(users, cfg, i);
  }
  return reduce_se(per_trial);
}

SePointResult run_se_point_serial(const std::vector<SeUserPipeline>& users,
                                  const SePointConfig& cfg) {
  check_se_inputs(users, cfg);
  std::vector<SeTrialOutput> per_trial(static_cast<std::size_t>(cfg.trials));
  for (long i = 0; i < cfg.trials; ++i) {
    per_trial[static_cast<std::size_t>(i)] = se_trial(users, cfg, i);
  }
  return reduce_se(per_trial);
}

std::vector<SweepRecord> run_se_sweep(const SweepConfig& cfg) {
  validate(cfg, /*se=*/true);
  const auto truth = user_covariances(cfg);

  std::vector<SweepRecord> records;
  for (DesignMethod method : cfg.methods) {
    for (double snr : cfg.snr_db) {
      const auto start = std::chrono::steady_clock::now();
      const double rho = db_to_linear(snr);
      SweepRecord rec;
      rec.method = to_string(method);
      rec.m = cfg.m;
      rec.k = cfg.k;
      rec.snr_db = snr;
      rec.trials = cfg.trials;
      rec.quant_bits = cfg.quant_bits;
      if (cfg.model == ChannelModel::exponential) rec.a = cfg.a;
      try {
        const double train_rho =
            cfg.train_snr_db ? db_to_linear(*cfg.train_snr_db) : rho;
        std::vector<SeUserPipeline> users;
        double analytic_sum = 0.0;
        for (int u = 0; u < cfg.k; ++u) {
          std::shared_ptr<const SpatialCovariance> design_cov = truth[u];
          if (cfg.n_c > 0 && method != DesignMethod::fully_digital) {
            const CovEstConfig cov_cfg{cfg.m, cfg.l, train_rho, cfg.n_c};
            design_cov = std::make_shared<const SpatialCovariance>(
                estimate_covariance(*truth[u], cov_cfg, cfg.seed,
                                    static_cast<std::uint64_t>(u))
                    .estimate);
          }
          const CombinerSet applied = constrain_combiners(
              design_combiners(method, *design_cov, cfg, train_rho), cfg);
          if (u == 0) {
            rec.phase_mode = to_string(applied.combiners.front().mode);
            rec.l = static_cast<int>(applied.combiners.front().rows());
            rec.t = applied.trainings();
            if (method == DesignMethod::alternating) rec.iters = applied.iterations;
          }
          SeUserPipeline pipe;
          pipe.truth = truth[u];
          pipe.stack = std::make_shared<const StackedCombiners>(stack_combiners(applied));
          pipe.wiener =
              wiener_filter_rfd(*design_cov, pipe.stack->f_c, pipe.stack->r_fd, train_rho);
          pipe.train_rho = train_rho;
          if (cfg.n_c == 0) {
            analytic_sum += analytic_mse_rfd(*truth[u], pipe.stack->f_c, pipe.stack->r_fd,
                                             train_rho) / cfg.m;
          }
          users.push_back(std::move(pipe));
        }
        SePointConfig point;
        point.rho = rho;
        point.l = cfg.l;
        point.quant_bits = effective_mode(cfg) == PhaseMode::quantized ? cfg.quant_bits : 0;
        point.trials = cfg.trials;
        point.seed = cfg.seed;
        point.threads = cfg.threads;
        const SePointResult res = run_se_point(users, point);
        rec.se_bits_per_hz = res.se_estimated;
        rec.se_perfect_bits_per_hz = res.se_perfect;
        rec.nmse_db = to_db(res.nmse);
        rec.std_err_db = std_err_db(res.nmse, res.nmse_std_err);
        if (cfg.n_c == 0) rec.nmse_db_analytic = to_db(analytic_sum / cfg.k);
      } catch (const NumericalError& e) {
        rec.status = std::string("numerical_error: ") + e.what();
      } catch (const DomainError& e) {
        rec.status = std::string("domain_error: ") + e.what();
      }
      if (cfg.timing) {
        rec.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - start)
                          .count();
      }
      records.push_back(std::move(rec));
    }
  }
  return records;
}

namespace {

std::string format_g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

void append_cell(std::string& out, const std::optional<double>& v) {
  if (v) out += format_g9(*v);
}

}  // namespace

std::string to_csv(const std::vector<SweepRecord>& records) {
  std::string out =
      "method,phase_mode,quant_bits,m,l,t,k,a,snr_db,trials,nmse_db,nmse_db_analytic,"
      "std_err_db,se_bits_per_hz,se_perfect_bits_per_hz,iters,status,wall_ms\n";
  for (const SweepRecord& r : records) {
    out += r.method;
    out += ',';
    out += r.phase_mode;
    out += ',';
    out += std::to_string(r.quant_bits);
    out += ',';
    out += std::to_string(r.m);
    out += ',';
    out += std::to_string(r.l);
    out += ',';
    out += std::to_string(r.t);
    out += ',';
    out += std::to_string(r.k);
    out += ',';
    append_cell(out, r.a);
    out += ',';
    out += format_g9(r.snr_db);
    out += ',';
    out += std::to_string(r.trials);
    out += ',';
    append_cell(out, r.nmse_db);
    out += ',';
    append_cell(out, r.nmse_db_analytic);
    out += ',';
    append_cell(out, r.std_err_db);
    out += ',';
    append_cell(out, r.se_bits_per_hz);
    out += ',';
    append_cell(out, r.se_perfect_bits_per_hz);
    out += ',';
    if (r.iters) out += std::to_string(*r.iters);
    out += ',';
    out += r.status;
    out += ',';
    append_cell(out, r.wall_ms);
    out += '\n';
  }
  return out;
}

void write_csv_file(const std::string& path, const std::vector<SweepRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << to_csv(records);
}

}  // namespace hybridest
