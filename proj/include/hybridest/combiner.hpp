#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hybridest/channel.hpp"
#include "hybridest/rng.hpp"

namespace hybridest {

enum class PhaseMode { unconstrained, phase_only, quantized };

enum class DesignMethod {
  single_optimal,
  block_selection,
  sequential,
  alternating,
  dft_random,
  fully_digital,
};

const char* to_string(PhaseMode mode);
const char* to_string(DesignMethod method);
std::optional<PhaseMode> phase_mode_from_string(std::string_view s);
std::optional<DesignMethod> design_method_from_string(std::string_view s);

/// One L x M RF combiner. Unconstrained combiners have orthonormal rows;
/// phase-only/quantized ones have unit-modulus entries.
struct Combiner {
  Eigen::MatrixXcd entries;
  PhaseMode mode = PhaseMode::unconstrained;
  int quant_bits = 0;  // meaningful in quantized mode

  Eigen::Index rows() const { return entries.rows(); }
  Eigen::Index cols() const { return entries.cols(); }
};

/// T combiners of one design, plus the selected eigen-index sets where the
/// design is an index selection (empty otherwise).
struct CombinerSet {
  std::vector<Combiner> combiners;
  std::vector<std::vector<int>> index_sets;
  DesignMethod method = DesignMethod::single_optimal;
  std::optional<double> mse_predicted;
  int iterations = 0;                  // alternating only
  bool truncated = false;              // alternating hit max_iter
  std::vector<double> mse_trajectory;  // alternating per-round MSE

  int trainings() const { return static_cast<int>(combiners.size()); }
};

/// Validates shared dimensions/mode and index-set ranges; throws on violation.
void validate(const CombinerSet& set);

/// Diagonal state of the sequential design: gamma holds the per-eigendirection
/// residual variances, updated after every training.
struct SequentialState {
  Eigen::VectorXd gamma;
  double rho = 0.0;
  int step = 0;
};

/// Single-training optimum: rows are the conjugated top-L eigenvectors of R.
Combiner design_single_optimal(const SpatialCovariance& cov, int l);

/// Single-training optimum wrapped as a one-element set with its closed-form
/// MSE prediction.
CombinerSet single_optimal_set(const SpatialCovariance& cov, int l, double rho);

/// Block Selection: training t takes eigen-directions (t-1)L .. tL-1.
CombinerSet design_block_selection(const SpatialCovariance& cov, int l, int t);

/// Sequential step-wise optimization; index repeats across trainings are
/// allowed. mse_predicted carries the exact MSE of the produced set. When
/// state_trace is given, the per-step gamma states are appended to it.
CombinerSet design_sequential(const SpatialCovariance& cov, int l, int t, double rho,
                              std::vector<SequentialState>* state_trace = nullptr);

/// Alternating (coordinate-descent) optimization starting from `init`.
/// Index-selection inits stay in the diagonal regime; general unconstrained
/// inits use the dense pencil solver. Non-convergence within max_iter returns
/// the best iterate with `truncated` set.
CombinerSet design_alternating(const SpatialCovariance& cov, int l, int t,
                               double rho, double epsilon, int max_iter,
                               const CombinerSet& init);

/// Convenience overload: init = sequential design.
CombinerSet design_alternating(const SpatialCovariance& cov, int l, int t,
                               double rho, double epsilon = 1e-8,
                               int max_iter = 100);

/// Random row-orthonormal combiners, for exercising the general alternating path.
CombinerSet random_unitary_init(int m, int l, int t, RngStream& rng);

/// Entrywise unit-modulus projection keeping phases; zero entries map to 1.
Combiner phase_only_project(const Combiner& c);

/// Snaps phases to {2 pi k / 2^bits}, ties toward the lower level.
Combiner quantize_phases(const Combiner& c, int bits);

/// Baseline: L distinct rows of the M-point DFT matrix.
Combiner dft_random_columns(int m, int l, RngStream& rng);

/// Identity combiner (L = M, T = 1): the fully-digital reference front end.
CombinerSet fully_digital_set(int m);

/// Applies the requested hardware constraint to every combiner in the set.
CombinerSet apply_phase_mode(const CombinerSet& set, PhaseMode mode, int bits);

}  // namespace hybridest
