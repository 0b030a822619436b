#include "kkf/filter.hpp"

#include <string>

namespace kkf {

namespace {

double min_kernel_eigenvalue(const KernelMatrix& k) {
  if (k.spectral_values && k.spectral_values->size() > 0) return k.spectral_values->minCoeff();
  return min_eigenvalue(k.matrix);
}

void check_slot(const FilterState& state, const Observation& obs) {
  if (obs.slot != state.slot + 1) {
    throw Error(ErrorCode::SlotOrderViolation, "expected slot " + std::to_string(state.slot + 1) + ", got " +
                                                   std::to_string(obs.slot));
  }
}

/// (K_bar + lambda2 |S| I)^{-1} r mapped back through K S^T.
Vector kriging_map(const Matrix& kernel, const Observation& obs, double lambda2, const Vector& residual) {
  const auto s = static_cast<double>(obs.count());
  Matrix reg = gather_block(kernel, obs.sample_indices);
  reg.diagonal().array() += lambda2 * s;
  const SpdSolver solver(reg, ErrorCode::SingularInnovationCovariance);
  const Vector weights = solver.solve(residual);
  return gather_cols(kernel, obs.sample_indices) * weights;
}

}  // namespace

FilterConfig make_filter_config(double lambda1, double lambda2, KernelMatrix kernel_nu, KernelMatrix kernel_eta,
                                Matrix transition) {
  if (!(lambda1 > 0.0) || !(lambda2 > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "lambda1 and lambda2 must be positive");
  }
  const Eigen::Index n = kernel_eta.matrix.rows();
  if (kernel_nu.matrix.rows() != n || kernel_nu.matrix.cols() != n || kernel_eta.matrix.cols() != n ||
      transition.rows() != n || transition.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "kernels and transition must all be " + std::to_string(n) + "x" +
                                                  std::to_string(n));
  }
  if (!(min_kernel_eigenvalue(kernel_eta) > 1e-12)) {
    throw Error(ErrorCode::SingularKernel, "state-noise kernel is not strictly positive definite");
  }
  return FilterConfig{lambda1, lambda2, std::move(kernel_nu), std::move(kernel_eta), std::move(transition)};
}

void validate(const Observation& obs, std::size_t num_nodes) {
  if (static_cast<std::size_t>(obs.values.size()) != obs.sample_indices.size()) {
    throw Error(ErrorCode::DimensionMismatch, "observation has " + std::to_string(obs.values.size()) +
                                                  " values for " + std::to_string(obs.sample_indices.size()) +
                                                  " indices");
  }
  for (std::size_t i = 0; i < obs.sample_indices.size(); ++i) {
    if (obs.sample_indices[i] >= num_nodes) {
      throw Error(ErrorCode::DimensionMismatch, "sample index " + std::to_string(obs.sample_indices[i]) +
                                                    " out of range");
    }
    if (i > 0 && obs.sample_indices[i] <= obs.sample_indices[i - 1]) {
      throw Error(ErrorCode::InvalidParameter, "sample indices must be strictly increasing");
    }
  }
}

FilterState initial_state(const FilterConfig& config) {
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  return FilterState{Vector::Zero(n), config.kernel_eta.matrix / config.lambda1, 0};
}

Matrix measurement_kernel(const FilterConfig& config, const Observation& obs) {
  Matrix c = gather_block(config.kernel_nu.matrix, obs.sample_indices) / config.lambda2;
  c.diagonal().array() += static_cast<double>(obs.count());
  return c;
}

Prediction predict(const FilterState& state, const FilterConfig& config) {
  const Matrix& b = config.transition;
  if (state.chi.size() != b.cols() || state.error_cov.rows() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "state does not match transition dimensions");
  }
  Matrix cov = b * state.error_cov * b.transpose() + config.kernel_eta.matrix / config.lambda1;
  return Prediction{b * state.chi, symmetrized(cov)};
}

Correction correct(const Prediction& pred, const Observation& obs, const FilterConfig& config) {
  const auto n = static_cast<Eigen::Index>(pred.chi.size());
  validate(obs, static_cast<std::size_t>(n));
  if (obs.count() == 0) {
    return Correction{FilterState{pred.chi, pred.cov, obs.slot}, Matrix(n, 0), Vector(0)};
  }
  // S M S^T + C_bar, and M S^T.
  Matrix innovation_cov = measurement_kernel(config, obs) + gather_block(pred.cov, obs.sample_indices);
  const Matrix cov_rows = gather_rows(pred.cov, obs.sample_indices);
  const SpdSolver solver(innovation_cov, ErrorCode::SingularInnovationCovariance);
  const Matrix gain = solver.solve(cov_rows).transpose();
  const Vector innovation = obs.values - gather(pred.chi, obs.sample_indices);

  FilterState next;
  next.chi = pred.chi + gain * innovation;
  next.error_cov = symmetrized(pred.cov - gain * cov_rows);
  next.slot = obs.slot;
  return Correction{std::move(next), gain, innovation};
}

Vector krige(const FilterState& state, const Observation& obs, const FilterConfig& config) {
  const auto n = static_cast<Eigen::Index>(state.chi.size());
  validate(obs, static_cast<std::size_t>(n));
  if (obs.count() == 0) return Vector::Zero(n);
  const Vector residual = obs.values - gather(state.chi, obs.sample_indices);
  return kriging_map(config.kernel_nu.matrix, obs, config.lambda2, residual);
}

std::pair<FilterState, SlotEstimate> kekrikf_step(const FilterState& state, const Observation& obs,
                                                  const FilterConfig& config) {
  check_slot(state, obs);
  const Prediction pred = predict(state, config);
  Correction corr = correct(pred, obs, config);
  SlotEstimate est;
  est.nu = krige(corr.state, obs, config);
  est.chi = corr.state.chi;
  est.f = est.chi + est.nu;
  est.gain = std::move(corr.gain);
  est.innovation = std::move(corr.innovation);
  return {std::move(corr.state), std::move(est)};
}

Vector instantaneous_estimate(const Observation& obs, const KernelMatrix& kernel, double lambda2) {
  validate(obs, kernel.size());
  if (obs.count() == 0) throw Error(ErrorCode::EmptyObservation, "no samples at slot " + std::to_string(obs.slot));
  if (!(lambda2 > 0.0)) throw Error(ErrorCode::InvalidParameter, "lambda2 must be positive");
  return kriging_map(kernel.matrix, obs, lambda2, obs.values);
}

std::pair<FilterState, SlotEstimate> kf_only_step(const FilterState& state, const Observation& obs,
                                                  const FilterConfig& config) {
  check_slot(state, obs);
  const Prediction pred = predict(state, config);
  Correction corr = correct(pred, obs, config);
  SlotEstimate est;
  est.chi = corr.state.chi;
  est.nu = Vector::Zero(est.chi.size());
  est.f = est.chi;
  est.gain = std::move(corr.gain);
  est.innovation = std::move(corr.innovation);
  return {std::move(corr.state), std::move(est)};
}

std::pair<FilterState, SlotEstimate> kkr_only_step(const FilterState& state, const Observation& obs,
                                                   const FilterConfig& config) {
  check_slot(state, obs);
  const auto n = static_cast<Eigen::Index>(config.num_nodes());
  FilterState next{Vector::Zero(n), state.error_cov, obs.slot};
  SlotEstimate est;
  est.chi = Vector::Zero(n);
  validate(obs, config.num_nodes());
  est.nu = obs.count() == 0 ? Vector::Zero(n)
                            : instantaneous_estimate(obs, config.kernel_nu, config.lambda2);
  est.f = est.nu;
  est.gain = Matrix(n, 0);
  est.innovation = obs.values;
  return {std::move(next), std::move(est)};
}

// --- batch oracle ---------------------------------------------------------

namespace {

const FilterConfig& config_at(const std::vector<FilterConfig>& configs, std::size_t tau) {
  return configs.size() == 1 ? configs.front() : configs.at(tau);
}

Matrix spd_inverse(const Matrix& a) {
  const SpdSolver solver(a, ErrorCode::SingularSystem);
  return symmetrized(solver.solve(Matrix::Identity(a.rows(), a.cols())));
}

Matrix first_prior(const std::vector<FilterConfig>& configs, const Matrix* initial_cov) {
  const FilterConfig& c1 = config_at(configs, 0);
  const Matrix m0 = initial_cov ? *initial_cov : Matrix(c1.kernel_eta.matrix / c1.lambda1);
  return symmetrized(c1.transition * m0 * c1.transition.transpose() + c1.kernel_eta.matrix / c1.lambda1);
}

void check_batch_inputs(const std::vector<Observation>& observations, const std::vector<FilterConfig>& configs,
                        std::size_t horizon) {
  if (configs.empty()) throw Error(ErrorCode::InvalidParameter, "batch oracle needs a config");
  if (horizon == 0 || observations.size() < horizon || (configs.size() != 1 && configs.size() < horizon)) {
    throw Error(ErrorCode::DimensionMismatch, "horizon exceeds supplied observations or configs");
  }
  if (!(config_at(configs, 0).lambda1 > 0.0) || !(config_at(configs, 0).lambda2 > 0.0)) {
    throw Error(ErrorCode::SingularSystem, "regularization weights must be positive");
  }
}

}  // namespace

BatchSolution batch_oracle(const std::vector<Observation>& observations, const std::vector<FilterConfig>& configs,
                           std::size_t horizon, const Matrix* initial_cov) {
  check_batch_inputs(observations, configs, horizon);
  const auto n = static_cast<Eigen::Index>(config_at(configs, 0).num_nodes());
  const auto t = static_cast<Eigen::Index>(horizon);
  const Eigen::Index dim = 2 * n * t;
  // Unknowns ordered [chi_1 .. chi_t, nu_1 .. nu_t]; the objective is
  // z^T H z - 2 g^T z + const.
  Matrix h = Matrix::Zero(dim, dim);
  Vector g = Vector::Zero(dim);
  auto chi_blk = [n](Eigen::Index tau) { return tau * n; };
  auto nu_blk = [n, t](Eigen::Index tau) { return (t + tau) * n; };

  for (Eigen::Index tau = 0; tau < t; ++tau) {
    const FilterConfig& c = config_at(configs, static_cast<std::size_t>(tau));
    if (!(c.lambda1 > 0.0) || !(c.lambda2 > 0.0)) {
      throw Error(ErrorCode::SingularSystem, "regularization weights must be positive");
    }
    const Observation& obs = observations[static_cast<std::size_t>(tau)];
    validate(obs, static_cast<std::size_t>(n));

    if (obs.count() > 0) {
      const Matrix s = selection_matrix(obs.sample_indices, static_cast<std::size_t>(n));
      const double w = 1.0 / static_cast<double>(obs.count());
      const Matrix sts = w * s.transpose() * s;
      const Vector sty = w * s.transpose() * obs.values;
      for (Eigen::Index a : {chi_blk(tau), nu_blk(tau)}) {
        g.segment(a, n) += sty;
        for (Eigen::Index b : {chi_blk(tau), nu_blk(tau)}) h.block(a, b, n, n) += sts;
      }
    }

    if (tau == 0) {
      h.block(chi_blk(0), chi_blk(0), n, n) += spd_inverse(first_prior(configs, initial_cov));
    } else {
      const Matrix w = c.lambda1 * spd_inverse(c.kernel_eta.matrix);
      const Matrix& b = c.transition;
      h.block(chi_blk(tau), chi_blk(tau), n, n) += w;
      h.block(chi_blk(tau), chi_blk(tau - 1), n, n) -= w * b;
      h.block(chi_blk(tau - 1), chi_blk(tau), n, n) -= b.transpose() * w;
      h.block(chi_blk(tau - 1), chi_blk(tau - 1), n, n) += b.transpose() * w * b;
    }
    h.block(nu_blk(tau), nu_blk(tau), n, n) += c.lambda2 * spd_inverse(c.kernel_nu.matrix);
  }

  const SpdSolver solver(symmetrized(h), ErrorCode::SingularSystem, 1e14);
  const Vector z = solver.solve(g);
  BatchSolution out;
  for (Eigen::Index tau = 0; tau < t; ++tau) {
    out.chi.emplace_back(z.segment(chi_blk(tau), n));
    out.nu.emplace_back(z.segment(nu_blk(tau), n));
  }
  return out;
}

double batch_objective(const std::vector<Observation>& observations, const std::vector<FilterConfig>& configs,
                       const BatchSolution& point, const Matrix* initial_cov) {
  const std::size_t horizon = point.chi.size();
  check_batch_inputs(observations, configs, horizon);
  double total = 0.0;
  for (std::size_t tau = 0; tau < horizon; ++tau) {
    const FilterConfig& c = config_at(configs, tau);
    const Observation& obs = observations[tau];
    const Vector f = point.chi[tau] + point.nu[tau];
    if (obs.count() > 0) {
      total += (obs.values - gather(f, obs.sample_indices)).squaredNorm() / static_cast<double>(obs.count());
    }
    if (tau == 0) {
      total += weighted_sq_norm(point.chi[0], first_prior(configs, initial_cov));
    } else {
      total += c.lambda1 * weighted_sq_norm(point.chi[tau] - c.transition * point.chi[tau - 1], c.kernel_eta.matrix);
    }
    total += c.lambda2 * weighted_sq_norm(point.nu[tau], c.kernel_nu.matrix);
  }
  return total;
}

}  // namespace kkf
