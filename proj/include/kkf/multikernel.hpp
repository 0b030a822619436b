#pragma once

#include <vector>

#include "kkf/filter.hpp"

namespace kkf {

enum class AccumulatorMode { SampleMean, Forgetting };

struct PgdParams {
  int max_iters = 1000;
  double tol = 1e-8;
  double armijo_s = 1.0;
  double armijo_beta = 0.5;
  double armijo_sigma = 1e-4;
  int max_backtracks = 60;
};

struct MKLConfig {
  double mu_theta_nu = 1.0;
  double mu_theta_eta = 1.0;
  double gamma_nu = 0.99;
  double gamma_eta = 0.99;
  AccumulatorMode accumulator_mode = AccumulatorMode::Forgetting;
  PgdParams pgd;
};

void validate(const MKLConfig& cfg);

/// Running outer-product sums of kriged components (nu) and trend residuals
/// (eta). Forgetting mode starts from the identity; sample-mean mode from
/// zero and reports sum / count.
struct CorrelationAccumulator {
  Matrix sigma_nu;
  Matrix sigma_eta;
  std::size_t count = 0;
  AccumulatorMode mode = AccumulatorMode::Forgetting;

  static CorrelationAccumulator make(std::size_t n, AccumulatorMode mode);

  Matrix correlation_nu() const;
  Matrix correlation_eta() const;
};

CorrelationAccumulator accumulate(const CorrelationAccumulator& acc, const Vector& nu_hat, const Vector& residual,
                                  const MKLConfig& cfg);

/// U^T Sigma U in the dictionary's eigenbasis.
struct ProjectedCorrelation {
  Matrix matrix;
};

ProjectedCorrelation project_correlation(const EigenBasis& basis, const Matrix& sigma);

/// F(theta) = sum_n R_nn / Lambda_n(theta) + mu ||theta||^2, with +infinity
/// when some Lambda_n <= 0 meets a nonzero R_nn.
double km_objective(const CoefficientVector& theta, const ProjectedCorrelation& rcheck, const KernelDictionary& dict,
                    double mu);

Vector km_gradient(const CoefficientVector& theta, const ProjectedCorrelation& rcheck, const KernelDictionary& dict,
                   double mu);

struct OkmResult {
  CoefficientVector theta;
  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // F at theta^0, theta^1, ...
};

/// Projected gradient descent with Armijo backtracking on the nonnegative
/// orthant, warm-started at `warm_start`.
OkmResult okm_solve_traced(const CoefficientVector& warm_start, const ProjectedCorrelation& rcheck,
                           const KernelDictionary& dict, double mu, const PgdParams& pgd);

CoefficientVector okm_solve(const CoefficientVector& warm_start, const ProjectedCorrelation& rcheck,
                            const KernelDictionary& dict, double mu, const PgdParams& pgd);

struct ThetaPair {
  CoefficientVector nu;
  CoefficientVector eta;
};

/// e_1 for both dictionaries.
ThetaPair initial_thetas(const KernelDictionary& dict_nu, const KernelDictionary& dict_eta);

/// chi = 0, M = K_eta^{(1)} / lambda1.
FilterState mkrikf_initial_state(const KernelDictionary& dict_eta, double lambda1);

struct MkrikfStep {
  FilterState state;
  SlotEstimate estimate;
  CorrelationAccumulator acc;
  ThetaPair thetas;
  bool eta_fallback = false;  // OKM zeroed theta_eta; previous value kept
  int okm_iterations_nu = 0;
  int okm_iterations_eta = 0;
};

/// Kernel combination, one filter step with the combined kernels, then
/// accumulator update and warm-started kernel matching for both thetas.
MkrikfStep mkrikf_step(const FilterState& state, const CorrelationAccumulator& acc, const ThetaPair& thetas,
                       const Observation& obs, const KernelDictionary& dict_nu, const KernelDictionary& dict_eta,
                       double lambda1, double lambda2, const Matrix& transition, const MKLConfig& mkl);

/// K(theta) for the kriging kernel; theta = 0 yields the zero kernel.
KernelMatrix combine_or_zero(const KernelDictionary& dict, const CoefficientVector& theta);

}  // namespace kkf
