#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hybridest/covest.hpp"

namespace hybridest {

enum class ChannelModel { exponential, ray };

const char* to_string(ChannelModel model);
std::optional<ChannelModel> channel_model_from_string(std::string_view s);

struct SweepConfig {
  int m = 64;
  int l = 8;
  int t = 1;
  int k = 1;
  double a = 0.8;
  ChannelModel model = ChannelModel::exponential;
  int ray_paths = 6;
  double ray_spread_deg = 10.0;
  double ray_mean_deg = 0.0;
  std::vector<double> snr_db = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
  std::vector<DesignMethod> methods = {DesignMethod::single_optimal};
  PhaseMode phase_mode = PhaseMode::unconstrained;
  int quant_bits = 0;  // 0 = none
  long trials = 10000;
  long n_c = 0;  // covariance-estimation intervals; 0 = use the true R
  double epsilon = 1e-8;
  int max_iter = 100;
  std::uint64_t seed = 1;
  // CLI-level settings, not config-file keys.
  std::string out;
  int threads = 0;    // 0 = OpenMP default
  bool timing = false;
  // SE sweeps: fixed uplink pilot SNR; unset = track each sweep point. A
  // fixed-pilot protocol trains once at one power while the horizontal axis
  // sweeps the downlink SNR.
  std::optional<double> train_snr_db;
};

/// Parses a flat key/value config file ('key = value', '#' comments).
/// Unknown and duplicate keys are rejected.
SweepConfig parse_config_file(const std::string& path);

/// Applies one 'key value' override with the same strict validation.
void apply_override(SweepConfig& cfg, const std::string& key, const std::string& value);

/// Cross-field validation shared by both sweep kinds; se = true additionally
/// checks the multi-user constraints.
void validate(const SweepConfig& cfg, bool se);

struct SweepRecord {
  std::string method;
  std::string phase_mode;
  int quant_bits = 0;
  int m = 0, l = 0, t = 0, k = 0;
  std::optional<double> a;
  double snr_db = 0.0;
  long trials = 0;
  std::optional<double> nmse_db;
  std::optional<double> nmse_db_analytic;
  std::optional<double> std_err_db;
  std::optional<double> se_bits_per_hz;
  std::optional<double> se_perfect_bits_per_hz;
  std::optional<long> iters;
  std::string status = "ok";
  std::optional<double> wall_ms;
};

std::string to_csv(const std::vector<SweepRecord>& records);
void write_csv_file(const std::string& path, const std::vector<SweepRecord>& records);

std::vector<SweepRecord> run_mse_sweep(const SweepConfig& cfg);
std::vector<SweepRecord> run_se_sweep(const SweepConfig& cfg);

/// Analog phase-only + baseband zero-forcing precoder built from channel
/// estimates. Analog column k < K carries the phases of the k-th estimated
/// channel's conjugate (quantized when quant_bits >= 1); columns K..L-1 are
/// DFT-filled. Baseband is the ZF pseudo-inverse of the effective channel,
/// regularized (and flagged) when that channel is rank deficient. Total power
/// is normalized to 1.
struct HybridPrecoder {
  Eigen::MatrixXcd analog;    // M x L
  Eigen::MatrixXcd baseband;  // L x K
  bool regularized = false;

  Eigen::MatrixXcd composite() const { return analog * baseband; }
};

HybridPrecoder phased_zf_precoder(const Eigen::MatrixXcd& h_hat, int l,
                                  int quant_bits = 0);

/// Downlink sum rate sum_k log2(1 + SINR_k) for composite precoding columns.
double sum_spectral_efficiency(const Eigen::MatrixXcd& h_true,
                               const HybridPrecoder& precoder, double rho);

/// One user's uplink-estimation pipeline inside an SE evaluation. `truth`
/// generates the actual channels; the combiners and Wiener filter encode the
/// covariance the BS believes in (true or covest output). train_rho is the
/// uplink pilot power, which the experiment protocol may fix independently of
/// the swept downlink SNR.
struct SeUserPipeline {
  std::shared_ptr<const SpatialCovariance> truth;
  std::shared_ptr<const StackedCombiners> stack;
  Eigen::MatrixXcd wiener;
  double train_rho = 1.0;
};

struct SePointConfig {
  double rho = 1.0;  // downlink SNR
  int l = 8;
  int quant_bits = 0;  // applied to the precoder's analog phases
  long trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;
};

struct SePointResult {
  double se_estimated = 0.0;
  double se_perfect = 0.0;
  double se_estimated_std_err = 0.0;
  double se_perfect_std_err = 0.0;
  double nmse = 0.0;  // uplink estimation NMSE against the true channels
  double nmse_std_err = 0.0;
};

/// Monte Carlo spectral-efficiency point: per trial draws every user's
/// channel, estimates it through the pipeline, and evaluates the phased-ZF
/// precoder against the true channels for both estimated and perfect CSI.
/// Deterministic for any thread count.
SePointResult run_se_point(const std::vector<SeUserPipeline>& users,
                           const SePointConfig& cfg);
SePointResult run_se_point_serial(const std::vector<SeUserPipeline>& users,
                                  const SePointConfig& cfg);

/// Per-user channel statistics implied by the config: a shared exponential
/// model, or per-user ray covariances with evenly spread mean angles.
std::vector<std::shared_ptr<const SpatialCovariance>> user_covariances(
    const SweepConfig& cfg);

/// The single-user covariance implied by the config (user 0's model).
SpatialCovariance single_user_covariance(const SweepConfig& cfg);

/// Designs one combiner set for `method` at the given SNR, using the config's
/// dimensions and solver settings.
CombinerSet design_combiners(DesignMethod method, const SpatialCovariance& cov,
                             const SweepConfig& cfg, double rho);

/// Applies the config's phase mode / quantization; fully-digital sets pass
/// through untouched.
CombinerSet constrain_combiners(const CombinerSet& set, const SweepConfig& cfg);

}  // namespace hybridest
