#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "hybridest/harness.hpp"

namespace {

using hybridest::SweepConfig;

struct CliState {
  std::string config_path;
  std::string out;
  int threads = 0;
  bool timing = false;
  std::vector<std::pair<std::string, std::string>> overrides;
};

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "m",       "l",         "t",          "k",           "a",
      "model",   "ray_paths", "ray_spread_deg", "ray_mean_deg", "snr_db",
      "methods", "phase_mode", "quant_bits", "trials",      "n_c",
      "epsilon", "max_iter",  "seed"};
  return keys;
}

void add_common_options(CLI::App* cmd, CliState& st) {
  cmd->add_option("--config", st.config_path, "Config file (flat key = value lines)");
  cmd->add_option("--out", st.out, "Output CSV path (default: stdout)");
  cmd->add_option("--threads", st.threads, "Worker threads, 0 = auto")
      ->check(CLI::NonNegativeNumber);
  cmd->add_flag("--timing", st.timing,
                "Record wall_ms per row (breaks byte-identical reruns)");
  for (const std::string& key : config_keys()) {
    cmd->add_option_function<std::string>(
           "--" + key,
           [&st, key](const std::string& value) { st.overrides.emplace_back(key, value); },
           "Override config key '" + key + "'")
        ->expected(1);
  }
}

SweepConfig build_config(const CliState& st) {
  SweepConfig cfg = st.config_path.empty() ? SweepConfig{}
                                           : hybridest::parse_config_file(st.config_path);
  for (const auto& [key, value] : st.overrides) {
    hybridest::apply_override(cfg, key, value);
  }
  cfg.out = st.out;
  cfg.threads = st.threads;
  cfg.timing = st.timing;
  return cfg;
}

void emit(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw hybridest::ConfigError("cannot open output file '" + out_path + "'");
  out << text;
}

std::string g9(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

int run_covest(const CliState& st, double rho_db) {
  SweepConfig cfg = build_config(st);
  hybridest::validate(cfg, /*se=*/false);
  const hybridest::SpatialCovariance truth = hybridest::single_user_covariance(cfg);
  hybridest::CovEstConfig cov_cfg;
  cov_cfg.m = cfg.m;
  cov_cfg.l = cfg.l;
  cov_cfg.rho = std::pow(10.0, rho_db / 10.0);
  cov_cfg.n_c = cfg.n_c > 0 ? cfg.n_c : 300;
  const auto outcome = hybridest::estimate_covariance(truth, cov_cfg, cfg.seed, 0,
                                                      /*track_trajectory=*/true);
  std::string text = "interval,rel_frob_error\n";
  for (const auto& point : outcome.trajectory) {
    text += std::to_string(point.interval) + "," + g9(point.rel_frob_error) + "\n";
  }
  emit(cfg.out, text);
  return 0;
}

int run_design(const CliState& st, const std::string& method_name, double rho_db) {
  SweepConfig cfg = build_config(st);
  hybridest::validate(cfg, /*se=*/false);
  const auto method = hybridest::design_method_from_string(method_name);
  if (!method) throw hybridest::ConfigError("unknown design method '" + method_name + "'");
  const hybridest::SpatialCovariance cov = hybridest::single_user_covariance(cfg);
  const double rho = std::pow(10.0, rho_db / 10.0);
  const hybridest::CombinerSet set = hybridest::constrain_combiners(
      hybridest::design_combiners(*method, cov, cfg, rho), cfg);

  std::string text = "# method=" + std::string(hybridest::to_string(set.method)) +
                     " mode=" + hybridest::to_string(set.combiners.front().mode) +
                     " quant_bits=" + std::to_string(set.combiners.front().quant_bits) +
                     " m=" + std::to_string(cfg.m) +
                     " l=" + std::to_string(set.combiners.front().rows()) +
                     " t=" + std::to_string(set.trainings()) + " rho_db=" + g9(rho_db) +
                     " seed=" + std::to_string(cfg.seed) + "\n";
  text += "t,i,j,re,im\n";
  for (int tt = 0; tt < set.trainings(); ++tt) {
    const Eigen::MatrixXcd& f = set.combiners[tt].entries;
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
      for (Eigen::Index j = 0; j < f.cols(); ++j) {
        text += std::to_string(tt) + "," + std::to_string(i) + "," + std::to_string(j) +
                "," + g9(f(i, j).real()) + "," + g9(f(i, j).imag()) + "\n";
      }
    }
  }
  emit(cfg.out, text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid massive-MIMO channel estimation: combiner design, MMSE "
               "estimation, covariance estimation, and Monte Carlo sweeps"};
  app.require_subcommand(1);

  CliState mse_state, se_state, cov_state, design_state;
  double cov_rho_db = 10.0;
  double design_rho_db = 10.0;
  std::string design_method = "sequential";

  CLI::App* mse = app.add_subcommand("mse-sweep", "Channel-estimation NMSE vs SNR");
  add_common_options(mse, mse_state);

  CLI::App* se = app.add_subcommand("se-sweep", "Downlink sum spectral efficiency vs SNR");
  add_common_options(se, se_state);
  double train_snr_db = 0.0;
  CLI::Option* train_opt = se->add_option(
      "--train_snr_db", train_snr_db,
      "Fixed uplink pilot SNR in dB (default: track each sweep point)");

  CLI::App* cov = app.add_subcommand("covest", "Covariance-estimation error trajectory");
  add_common_options(cov, cov_state);
  cov->add_option("--rho_db", cov_rho_db, "Training SNR in dB (default 10)");

  CLI::App* design = app.add_subcommand("design", "Dump a designed combiner set");
  add_common_options(design, design_state);
  design->add_option("--method", design_method, "Design method (default sequential)");
  design->add_option("--rho_db", design_rho_db, "Design SNR in dB (default 10)");

  try {
    app.parse(argc, argv);
    if (mse->parsed()) {
      SweepConfig cfg = build_config(mse_state);
      const auto records = hybridest::run_mse_sweep(cfg);
      emit(cfg.out, hybridest::to_csv(records));
      return 0;
    }
    if (se->parsed()) {
      SweepConfig cfg = build_config(se_state);
      if (train_opt->count() > 0) cfg.train_snr_db = train_snr_db;
      const auto records = hybridest::run_se_sweep(cfg);
      emit(cfg.out, hybridest::to_csv(records));
      return 0;
    }
    if (cov->parsed()) return run_covest(cov_state, cov_rho_db);
    if (design->parsed()) return run_design(design_state, design_method, design_rho_db);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const hybridest::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hybridest::DomainError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const hybridest::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
