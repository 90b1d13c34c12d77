#include "hybridest/combiner.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridest {

const char* to_string(PhaseMode mode) {
  switch (mode) {
    case PhaseMode::unconstrained: return "unconstrained";
    case PhaseMode::phase_only: return "phase_only";
    case PhaseMode::quantized: return "quantized";
  }
  return "?";
}

const char* to_string(DesignMethod method) {
  switch (method) {
    case DesignMethod::single_optimal: return "single_optimal";
    case DesignMethod::block_selection: return "block_selection";
    case DesignMethod::sequential: return "sequential";
    case DesignMethod::alternating: return "alternating";
    case DesignMethod::dft_random: return "dft_random";
    case DesignMethod::fully_digital: return "fully_digital";
  }
  return "?";
}

std::optional<PhaseMode> phase_mode_from_string(std::string_view s) {
  if (s == "unconstrained") return PhaseMode::unconstrained;
  if (s == "phase_only") return PhaseMode::phase_only;
  if (s == "quantized") return PhaseMode::quantized;
  return std::nullopt;
}

std::optional<DesignMethod> design_method_from_string(std::string_view s) {
  if (s == "single_optimal") return DesignMethod::single_optimal;
  if (s == "block_selection") return DesignMethod::block_selection;
  if (s == "sequential") return DesignMethod::sequential;
  if (s == "alternating") return DesignMethod::alternating;
  if (s == "dft_random") return DesignMethod::dft_random;
  if (s == "fully_digital") return DesignMethod::fully_digital;
  return std::nullopt;
}

void validate(const CombinerSet& set) {
  if (set.combiners.empty()) throw DomainError("CombinerSet: no combiners");
  const Eigen::Index l = set.combiners.front().rows();
  const Eigen::Index m = set.combiners.front().cols();
  const PhaseMode mode = set.combiners.front().mode;
  for (const Combiner& c : set.combiners) {
    if (c.rows() != l || c.cols() != m) {
      throw DimensionError("CombinerSet: combiner dimensions differ");
    }
    if (c.mode != mode) throw DomainError("CombinerSet: mixed phase modes");
    if (c.mode == PhaseMode::unconstrained) {
      const Eigen::MatrixXcd gram = c.entries * c.entries.adjoint();
      if ((gram - Eigen::MatrixXcd::Identity(l, l)).cwiseAbs().maxCoeff() > 1e-10) {
        throw DomainError("CombinerSet: unconstrained combiner rows are not orthonormal");
      }
    } else {
      if ((c.entries.cwiseAbs().array() - 1.0).abs().maxCoeff() > 1e-12) {
        throw DomainError("CombinerSet: constant-magnitude combiner has non-unit entries");
      }
      if (c.mode == PhaseMode::quantized && c.quant_bits < 1) {
        throw DomainError("CombinerSet: quantized combiner without a bit width");
      }
    }
  }
  if (!set.index_sets.empty()) {
    if (set.index_sets.size() != set.combiners.size()) {
      throw DomainError("CombinerSet: index_sets count differs from trainings");
    }
    for (const auto& idx : set.index_sets) {
      std::vector<int> sorted = idx;
      std::sort(sorted.begin(), sorted.end());
      if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw DomainError("CombinerSet: duplicate index within one training");
      }
      for (int j : idx) {
        if (j < 0 || j >= m) throw DomainError("CombinerSet: index out of range");
      }
    }
  }
}

namespace {

/// Indices of the L largest scores, ties broken toward the lowest index.
std::vector<int> top_indices(const Eigen::VectorXd& score, int l) {
  std::vector<int> order(score.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return score(i) > score(j); });
  std::vector<int> sel(order.begin(), order.begin() + l);
  std::sort(sel.begin(), sel.end());
  return sel;
}

Combiner combiner_from_indices(const Eigen::MatrixXcd& u, const std::vector<int>& idx) {
  Combiner c;
  c.entries.resize(static_cast<Eigen::Index>(idx.size()), u.rows());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    c.entries.row(static_cast<Eigen::Index>(r)) = u.col(idx[r]).adjoint();
  }
  c.mode = PhaseMode::unconstrained;
  return c;
}

double gamma_update(double gamma, double rho) { return gamma / (1.0 + rho * gamma); }

double selection_score(double gamma, double rho) {
  return gamma <= 0.0 ? 0.0 : gamma * gamma / (gamma + 1.0 / rho);
}

/// MSE of an index-selection design: sum_i lambda_i / (1 + rho c_i lambda_i)
/// where c_i counts how many trainings observe direction i.
double mse_from_counts(const Eigen::VectorXd& lambda, const Eigen::VectorXi& counts,
                       double rho) {
  double mse = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    const double li = std::max(lambda(i), 0.0);
    mse += li / (1.0 + rho * counts(i) * li);
  }
  return mse;
}

double mse_closed_form_single(const Eigen::VectorXd& lambda, int l, double rho) {
  double captured = 0.0;
  for (int i = 0; i < l; ++i) {
    const double li = std::max(lambda(i), 0.0);
    captured += li * li / (li + 1.0 / rho);
  }
  return lambda.sum() - captured;
}

void check_dims(const SpatialCovariance& cov, int l, int t) {
  if (l < 1 || l > cov.dim()) {
    throw DimensionError("combiner design: L must satisfy 1 <= L <= M");
  }
  if (t < 1) throw DomainError("combiner design: T must be >= 1");
}

}  // namespace

Combiner design_single_optimal(const SpatialCovariance& cov, int l) {
  check_dims(cov, l, 1);
  Combiner c;
  c.entries = cov.eig().vectors.leftCols(l).adjoint();
  c.mode = PhaseMode::unconstrained;
  return c;
}

CombinerSet single_optimal_set(const SpatialCovariance& cov, int l, double rho) {
  if (!(rho > 0.0)) throw DomainError("single_optimal_set: rho must be positive");
  CombinerSet set;
  set.combiners.push_back(design_single_optimal(cov, l));
  std::vector<int> idx(l);
  std::iota(idx.begin(), idx.end(), 0);
  set.index_sets.push_back(std::move(idx));
  set.method = DesignMethod::single_optimal;
  set.mse_predicted = mse_closed_form_single(cov.eig().values, l, rho);
  return set;
}

CombinerSet design_block_selection(const SpatialCovariance& cov, int l, int t) {
  check_dims(cov, l, t);
  if (t * l > cov.dim()) {
    throw DimensionError("design_block_selection: T*L must not exceed M");
  }
  CombinerSet set;
  set.method = DesignMethod::block_selection;
  for (int tt = 0; tt < t; ++tt) {
    std::vector<int> idx(l);
    std::iota(idx.begin(), idx.end(), tt * l);
    set.combiners.push_back(combiner_from_indices(cov.eig().vectors, idx));
    set.index_sets.push_back(std::move(idx));
  }
  return set;
}

CombinerSet design_sequential(const SpatialCovariance& cov, int l, int t, double rho,
                              std::vector<SequentialState>* state_trace) {
  check_dims(cov, l, t);
  if (!(rho > 0.0)) throw DomainError("design_sequential: rho must be positive");

  const Eigen::VectorXd& lambda = cov.eig().values;
  Eigen::VectorXd gamma = lambda.cwiseMax(0.0);
  CombinerSet set;
  set.method = DesignMethod::sequential;
  for (int tt = 0; tt < t; ++tt) {
    if (state_trace) state_trace->push_back({gamma, rho, tt});
    Eigen::VectorXd score(gamma.size());
    for (Eigen::Index i = 0; i < gamma.size(); ++i) {
      score(i) = selection_score(gamma(i), rho);
    }
    std::vector<int> idx = top_indices(score, l);
    for (int j : idx) gamma(j) = gamma_update(gamma(j), rho);
    set.combiners.push_back(combiner_from_indices(cov.eig().vectors, idx));
    set.index_sets.push_back(std::move(idx));
  }
  if (state_trace) state_trace->push_back({gamma, rho, t});
  set.mse_predicted = gamma.sum();
  return set;
}

namespace {

struct DiagonalAlternating {
  const Eigen::VectorXd& lambda;
  double rho;
  int l;
  std::vector<std::vector<int>> sets;

  Eigen::VectorXi counts() const {
    Eigen::VectorXi c = Eigen::VectorXi::Zero(lambda.size());
    for (const auto& s : sets) {
      for (int j : s) c(j) += 1;
    }
    return c;
  }

  double mse() const { return mse_from_counts(lambda, counts(), rho); }

  void update_coordinate(int j) {
    Eigen::VectorXi c = counts();
    for (int i : sets[j]) c(i) -= 1;
    Eigen::VectorXd score(lambda.size());
    for (Eigen::Index i = 0; i < lambda.size(); ++i) {
      const double li = std::max(lambda(i), 0.0);
      const double q = li / (1.0 + rho * c(i) * li);
      score(i) = selection_score(q, rho);
    }
    sets[j] = top_indices(score, l);
  }
};

struct DenseAlternating {
  const SpatialCovariance& cov;
  double rho;
  int l;
  std::vector<Eigen::MatrixXcd> v;  // tilde-V_t in the eigenbasis of R

  Eigen::MatrixXcd information(int skip) const {
    const Eigen::VectorXd& lambda = cov.eig().values;
    Eigen::MatrixXcd info = lambda.cwiseInverse().cast<std::complex<double>>().asDiagonal();
    for (int tt = 0; tt < static_cast<int>(v.size()); ++tt) {
      if (tt == skip) continue;
      info.noalias() += rho * v[tt] * v[tt].adjoint();
    }
    return info;
  }

  double mse() const {
    const Eigen::MatrixXcd info = information(-1);
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("design_alternating: information matrix factorization failed");
    }
    const Eigen::Index m = info.rows();
    return std::real(ldlt.solve(Eigen::MatrixXcd::Identity(m, m)).trace());
  }

  void update_coordinate(int j) {
    const Eigen::Index m = cov.dim();
    const Eigen::MatrixXcd info = information(j);
    const Eigen::LDLT<Eigen::MatrixXcd> ldlt(info);
    if (ldlt.info() != Eigen::Success) {
      throw NumericalError("design_alternating: Q_j factorization failed");
    }
    const HermitianMatrix q =
        HermitianMatrix::symmetrized(ldlt.solve(Eigen::MatrixXcd::Identity(m, m)));
    const HermitianMatrix q_sq = HermitianMatrix::symmetrized(q.entries() * q.entries());
    const HermitianMatrix shifted = HermitianMatrix::symmetrized(
        q.entries() + (1.0 / rho) * Eigen::MatrixXcd::Identity(m, m));
    const EigenSystem pencil = gen_eigh_pencil(q_sq, shifted);
    // Pencil vectors are B-orthonormal; restore plain orthonormality on the
    // selected span, which is what the combiner constraint requires.
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(pencil.vectors.leftCols(l));
    v[j] = qr.householderQ() * Eigen::MatrixXcd::Identity(m, l);
  }
};

}  // namespace

CombinerSet design_alternating(const SpatialCovariance& cov, int l, int t, double rho,
                               double epsilon, int max_iter, const CombinerSet& init) {
  check_dims(cov, l, t);
  if (!(rho > 0.0)) throw DomainError("design_alternating: rho must be positive");
  if (!(epsilon > 0.0)) throw DomainError("design_alternating: epsilon must be positive");
  if (max_iter < 1) throw DomainError("design_alternating: max_iter must be >= 1");
  validate(init);
  if (init.trainings() != t || init.combiners.front().rows() != l ||
      init.combiners.front().cols() != cov.dim()) {
    throw DimensionError("design_alternating: init dimensions inconsistent");
  }
  if (init.combiners.front().mode != PhaseMode::unconstrained) {
    throw DomainError("design_alternating: init must be unconstrained");
  }

  CombinerSet out;
  out.method = DesignMethod::alternating;
  const bool diagonal = !init.index_sets.empty();

  if (diagonal) {
    DiagonalAlternating state{cov.eig().values, rho, l, init.index_sets};
    double prev = state.mse();
    out.mse_trajectory.push_back(prev);
    bool converged = false;
    for (int round = 0; round < max_iter && !converged; ++round) {
      for (int j = 0; j < t; ++j) state.update_coordinate(j);
      const double cur = state.mse();
      out.mse_trajectory.push_back(cur);
      ++out.iterations;
      converged = std::abs(cur - prev) / prev < epsilon;
      prev = cur;
    }
    out.truncated = !converged;
    for (const auto& idx : state.sets) {
      out.combiners.push_back(combiner_from_indices(cov.eig().vectors, idx));
    }
    out.index_sets = state.sets;
    out.mse_predicted = prev;
    return out;
  }

  if (cov.eig().values.minCoeff() <= 1e-12 * std::max(1.0, cov.eig().values.maxCoeff())) {
    throw DomainError(
        "design_alternating: general-initialization path requires full-rank R");
  }
  DenseAlternating state{cov, rho, l, {}};
  const Eigen::MatrixXcd& u = cov.eig().vectors;
  for (const Combiner& c : init.combiners) {
    state.v.push_back(u.adjoint() * c.entries.adjoint());
  }
  double prev = state.mse();
  out.mse_trajectory.push_back(prev);
  bool converged = false;
  for (int round = 0; round < max_iter && !converged; ++round) {
    for (int j = 0; j < t; ++j) state.update_coordinate(j);
    const double cur = state.mse();
    out.mse_trajectory.push_back(cur);
    ++out.iterations;
    converged = std::abs(cur - prev) / prev < epsilon;
    prev = cur;
  }
  out.truncated = !converged;
  for (const Eigen::MatrixXcd& vt : state.v) {
    Combiner c;
    c.entries = (u * vt).adjoint();
    c.mode = PhaseMode::unconstrained;
    out.combiners.push_back(std::move(c));
  }
  out.mse_predicted = prev;
  return out;
}

CombinerSet design_alternating(const SpatialCovariance& cov, int l, int t, double rho,
                               double epsilon, int max_iter) {
  return design_alternating(cov, l, t, rho, epsilon, max_iter,
                            design_sequential(cov, l, t, rho));
}

CombinerSet random_unitary_init(int m, int l, int t, RngStream& rng) {
  if (l < 1 || l > m) throw DimensionError("random_unitary_init: need 1 <= L <= M");
  CombinerSet set;
  set.method = DesignMethod::alternating;
  for (int tt = 0; tt < t; ++tt) {
    Eigen::MatrixXcd g(m, l);
    for (Eigen::Index j = 0; j < l; ++j) g.col(j) = rng.cgaussian_vector(m);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(g);
    Combiner c;
    c.entries = (qr.householderQ() * Eigen::MatrixXcd::Identity(m, l)).adjoint();
    c.mode = PhaseMode::unconstrained;
    set.combiners.push_back(std::move(c));
  }
  return set;
}

Combiner phase_only_project(const Combiner& c) {
  if (c.mode != PhaseMode::unconstrained) {
    throw DomainError("phase_only_project: input must be unconstrained");
  }
  Combiner out;
  out.entries.resize(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      const std::complex<double> z = c.entries(i, j);
      const double mag = std::abs(z);
      out.entries(i, j) = mag == 0.0 ? 1.0 : z / mag;
    }
  }
  out.mode = PhaseMode::phase_only;
  return out;
}

Combiner quantize_phases(const Combiner& c, int bits) {
  if (c.mode != PhaseMode::phase_only) {
    throw DomainError("quantize_phases: input must be phase_only");
  }
  if (bits < 1) throw DomainError("quantize_phases: bits must be >= 1");
  const long levels = 1L << bits;
  const double step = 2.0 * M_PI / static_cast<double>(levels);
  Combiner out;
  out.entries.resize(c.rows(), c.cols());
  for (Eigen::Index i = 0; i < c.rows(); ++i) {
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      double phase = std::arg(c.entries(i, j));
      if (phase < 0.0) phase += 2.0 * M_PI;
      // Nearest level, exact ties toward the lower one.
      long k = static_cast<long>(std::ceil(phase / step - 0.5));
      k = ((k % levels) + levels) % levels;
      out.entries(i, j) = std::polar(1.0, step * static_cast<double>(k));
    }
  }
  out.mode = PhaseMode::quantized;
  out.quant_bits = bits;
  return out;
}

Combiner dft_random_columns(int m, int l, RngStream& rng) {
  if (l < 1 || l > m) throw DimensionError("dft_random_columns: need 1 <= L <= M");
  std::vector<int> pool(m);
  std::iota(pool.begin(), pool.end(), 0);
  for (int i = 0; i < l; ++i) {
    const int j = i + static_cast<int>(rng.next_index(static_cast<std::uint64_t>(m - i)));
    std::swap(pool[i], pool[j]);
  }
  Combiner c;
  c.entries.resize(l, m);
  for (int r = 0; r < l; ++r) {
    for (int n = 0; n < m; ++n) {
      c.entries(r, n) = std::polar(1.0, -2.0 * M_PI * pool[r] * n / m);
    }
  }
  c.mode = PhaseMode::phase_only;
  return c;
}

CombinerSet fully_digital_set(int m) {
  CombinerSet set;
  Combiner c;
  c.entries = Eigen::MatrixXcd::Identity(m, m);
  c.mode = PhaseMode::unconstrained;
  set.combiners.push_back(std::move(c));
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  set.index_sets.push_back(std::move(idx));
  set.method = DesignMethod::fully_digital;
  return set;
}

CombinerSet apply_phase_mode(const CombinerSet& set, PhaseMode mode, int bits) {
  validate(set);
  if (mode == PhaseMode::unconstrained) return set;
  CombinerSet out = set;
  out.mse_predicted.reset();  // predictions refer to the unconstrained design
  for (Combiner& c : out.combiners) {
    if (c.mode == PhaseMode::unconstrained) c = phase_only_project(c);
    if (mode == PhaseMode::quantized) c = quantize_phases(c, bits);
  }
  return out;
}

}  // namespace hybridest
