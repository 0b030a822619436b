#pragma once

#include <utility>
#include <vector>

#include "kkf/kernels.hpp"
#include "kkf/linalg.hpp"

namespace kkf {

/// Per-slot filter parameters. kernel_eta must be strictly positive definite;
/// transition is the resolved B(t, t-1).
struct FilterConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  KernelMatrix kernel_nu;
  KernelMatrix kernel_eta;
  Matrix transition;

  std::size_t num_nodes() const noexcept { return kernel_eta.size(); }
};

/// Validating constructor for FilterConfig.
FilterConfig make_filter_config(double lambda1, double lambda2, KernelMatrix kernel_nu, KernelMatrix kernel_eta,
                                Matrix transition);

/// y(t) sampled at strictly increasing node indices S(t). May be empty.
struct Observation {
  std::size_t slot = 1;
  IndexList sample_indices;
  Vector values;

  std::size_t count() const noexcept { return sample_indices.size(); }
};

void validate(const Observation& obs, std::size_t num_nodes);

struct FilterState {
  Vector chi;        // chi_{t|t}
  Matrix error_cov;  // M_{t|t}
  std::size_t slot = 0;
};

/// chi_{0|0} = 0, M_{0|0} = K_eta / lambda1.
FilterState initial_state(const FilterConfig& config);

struct SlotEstimate {
  Vector chi;
  Vector nu;
  Vector f;
  Matrix gain;
  Vector innovation;
};

struct Prediction {
  Vector chi;
  Matrix cov;
};

struct Correction {
  FilterState state;
  Matrix gain;
  Vector innovation;
};

/// (1/lambda2) * K_nu restricted to S, plus |S| I.
Matrix measurement_kernel(const FilterConfig& config, const Observation& obs);

Prediction predict(const FilterState& state, const FilterConfig& config);

Correction correct(const Prediction& pred, const Observation& obs, const FilterConfig& config);

/// Closed-form minimizer of the per-slot fit plus K_nu regularizer for a
/// fixed trend: nu = K_nu S^T (S K_nu S^T + lambda2 |S| I)^{-1} (y - S chi).
Vector krige(const FilterState& state, const Observation& obs, const FilterConfig& config);

std::pair<FilterState, SlotEstimate> kekrikf_step(const FilterState& state, const Observation& obs,
                                                  const FilterConfig& config);

/// Per-slot kernel ridge regression: K S^T (K_bar + lambda2 |S| I)^{-1} y.
Vector instantaneous_estimate(const Observation& obs, const KernelMatrix& kernel, double lambda2);

/// Kalman recursion only; the instantaneous component is forced to zero.
std::pair<FilterState, SlotEstimate> kf_only_step(const FilterState& state, const Observation& obs,
                                                  const FilterConfig& config);

/// Kriging only (trend forced to zero); carries no information across slots.
std::pair<FilterState, SlotEstimate> kkr_only_step(const FilterState& state, const Observation& obs,
                                                   const FilterConfig& config);

// Direct minimizer of the batch space-time objective, used to certify the
// recursion. Intended for desk-scale problems (horizon * N <= 2000).

struct BatchSolution {
  std::vector<Vector> chi;
  std::vector<Vector> nu;
};

/// `configs` holds one config per slot, or a single config reused for all.
/// The first trend term is weighted by the predicted prior
/// B_1 M_0 B_1^T + K_eta / lambda1 with M_0 = K_eta / lambda1 unless
/// `initial_cov` is given, which is the prior the recursion starts from.
BatchSolution batch_oracle(const std::vector<Observation>& observations, const std::vector<FilterConfig>& configs,
                           std::size_t horizon, const Matrix* initial_cov = nullptr);

double batch_objective(const std::vector<Observation>& observations, const std::vector<FilterConfig>& configs,
                       const BatchSolution& point, const Matrix* initial_cov = nullptr);

}  // namespace kkf
