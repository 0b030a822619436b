#include "kkf/multikernel.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "kkf/simd/spectral_ops.hpp"

namespace kkf {

namespace {

void check_dims(const CoefficientVector& theta, const ProjectedCorrelation& rcheck, const KernelDictionary& dict) {
  if (static_cast<std::size_t>(theta.size()) != dict.num_kernels() ||
      static_cast<std::size_t>(rcheck.matrix.rows()) != dict.num_nodes()) {
    throw Error(ErrorCode::DimensionMismatch, "theta, correlation and dictionary sizes disagree");
  }
}

}  // namespace

void validate(const MKLConfig& cfg) {
  auto bad = [](const std::string& m) { throw Error(ErrorCode::InvalidParameter, m); };
  if (!(cfg.mu_theta_nu >= 0.0) || !(cfg.mu_theta_eta >= 0.0)) bad("mu values must be >= 0");
  if (!(cfg.gamma_nu > 0.0 && cfg.gamma_nu <= 1.0) || !(cfg.gamma_eta > 0.0 && cfg.gamma_eta <= 1.0)) {
    bad("forgetting factors must lie in (0, 1]");
  }
  const PgdParams& p = cfg.pgd;
  if (p.max_iters <= 0 || !(p.tol > 0.0) || !(p.armijo_s > 0.0) || !(p.armijo_beta > 0.0 && p.armijo_beta < 1.0) ||
      !(p.armijo_sigma > 0.0 && p.armijo_sigma < 1.0) || p.max_backtracks <= 0) {
    bad("PGD parameters out of range");
  }
}

CorrelationAccumulator CorrelationAccumulator::make(std::size_t n, AccumulatorMode mode) {
  const auto sz = static_cast<Eigen::Index>(n);
  CorrelationAccumulator acc;
  acc.mode = mode;
  if (mode == AccumulatorMode::Forgetting) {
    acc.sigma_nu = Matrix::Identity(sz, sz);
    acc.sigma_eta = Matrix::Identity(sz, sz);
  } else {
    acc.sigma_nu = Matrix::Zero(sz, sz);
    acc.sigma_eta = Matrix::Zero(sz, sz);
  }
  return acc;
}

Matrix CorrelationAccumulator::correlation_nu() const {
  if (mode == AccumulatorMode::Forgetting || count == 0) return sigma_nu;
  return sigma_nu / static_cast<double>(count);
}

Matrix CorrelationAccumulator::correlation_eta() const {
  if (mode == AccumulatorMode::Forgetting || count == 0) return sigma_eta;
  return sigma_eta / static_cast<double>(count);
}

CorrelationAccumulator accumulate(const CorrelationAccumulator& acc, const Vector& nu_hat, const Vector& residual,
                                  const MKLConfig& cfg) {
  const auto n = static_cast<std::size_t>(acc.sigma_nu.rows());
  if (static_cast<std::size_t>(nu_hat.size()) != n || static_cast<std::size_t>(residual.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "accumulator update vectors must have length " + std::to_string(n));
  }
  const bool forgetting = acc.mode == AccumulatorMode::Forgetting;
  CorrelationAccumulator out = acc;
  const auto& ops = simd::active();
  ops.decay_rank1(forgetting ? cfg.gamma_nu : 1.0, nu_hat.data(), out.sigma_nu.data(), n);
  ops.decay_rank1(forgetting ? cfg.gamma_eta : 1.0, residual.data(), out.sigma_eta.data(), n);
  ++out.count;
  return out;
}

ProjectedCorrelation project_correlation(const EigenBasis& basis, const Matrix& sigma) {
  const Matrix& u = basis.eigenvectors;
  if (sigma.rows() != u.rows() || sigma.cols() != u.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "correlation size does not match basis");
  }
  return ProjectedCorrelation{symmetrized(u.transpose() * sigma * u)};
}

double km_objective(const CoefficientVector& theta, const ProjectedCorrelation& rcheck, const KernelDictionary& dict,
                    double mu) {
  check_dims(theta, rcheck, dict);
  const Vector lam = combined_spectrum(dict, theta);
  const Vector r = rcheck.matrix.diagonal();
  const double trace_term = simd::active().reciprocal_weighted_sum(r.data(), lam.data(), dict.num_nodes());
  return trace_term + mu * theta.squaredNorm();
}

Vector km_gradient(const CoefficientVector& theta, const ProjectedCorrelation& rcheck, const KernelDictionary& dict,
                   double mu) {
  check_dims(theta, rcheck, dict);
  const Vector lam = combined_spectrum(dict, theta);
  const Vector r = rcheck.matrix.diagonal();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (r(i) != 0.0 && !(lam(i) > 0.0)) {
      throw Error(ErrorCode::InfeasiblePoint, "combined spectrum vanishes at index " + std::to_string(i));
    }
  }
  const auto& ops = simd::active();
  const std::size_t n = dict.num_nodes();
  Vector w(lam.size());
  ops.inverse_square_weights(r.data(), lam.data(), w.data(), n);
  Vector grad(theta.size());
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    grad(p) = -ops.dot(w.data(), dict.spectra.row(p).data(), n) + 2.0 * mu * theta(p);
  }
  return grad;
}

OkmResult okm_solve_traced(const CoefficientVector& warm_start, const ProjectedCorrelation& rcheck,
                           const KernelDictionary& dict, double mu, const PgdParams& pgd) {
  check_dims(warm_start, rcheck, dict);
  if ((warm_start.array() < 0.0).any()) throw Error(ErrorCode::InvalidParameter, "warm start must be nonnegative");

  OkmResult res;
  res.theta = warm_start;
  double f = km_objective(res.theta, rcheck, dict, mu);
  if (!std::isfinite(f)) throw Error(ErrorCode::NoFeasibleDescent, "warm start is infeasible");
  res.objective_trace.push_back(f);

  for (int it = 0; it < pgd.max_iters; ++it) {
    const Vector grad = km_gradient(res.theta, rcheck, dict, mu);
    double step = pgd.armijo_s;
    bool accepted = false;
    CoefficientVector next;
    double f_next = f;
    double move = 0.0;
    for (int m = 0; m <= pgd.max_backtracks; ++m, step *= pgd.armijo_beta) {
      next = (res.theta - step * grad).cwiseMax(0.0);
      move = (next - res.theta).cwiseAbs().maxCoeff();
      if (move == 0.0) break;
      f_next = km_objective(next, rcheck, dict, mu);
      if (std::isfinite(f_next) && f_next <= f + pgd.armijo_sigma * grad.dot(next - res.theta)) {
        accepted = true;
        break;
      }
      if (move < pgd.tol * 1e-3) break;
    }
    if (!accepted) {
      // No admissible step larger than rounding: theta is stationary.
      if (move < pgd.tol) {
        res.converged = true;
        return res;
      }
      throw Error(ErrorCode::NoFeasibleDescent, "Armijo backtracking exhausted");
    }
    res.theta = std::move(next);
    f = f_next;
    res.objective_trace.push_back(f);
    res.iterations = it + 1;
    if (move < pgd.tol) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

CoefficientVector okm_solve(const CoefficientVector& warm_start, const ProjectedCorrelation& rcheck,
                            const KernelDictionary& dict, double mu, const PgdParams& pgd) {
  return okm_solve_traced(warm_start, rcheck, dict, mu, pgd).theta;
}

ThetaPair initial_thetas(const KernelDictionary& dict_nu, const KernelDictionary& dict_eta) {
  ThetaPair t{Vector::Zero(static_cast<Eigen::Index>(dict_nu.num_kernels())),
              Vector::Zero(static_cast<Eigen::Index>(dict_eta.num_kernels()))};
  t.nu(0) = 1.0;
  t.eta(0) = 1.0;
  return t;
}

FilterState mkrikf_initial_state(const KernelDictionary& dict_eta, double lambda1) {
  Vector e1 = Vector::Zero(static_cast<Eigen::Index>(dict_eta.num_kernels()));
  e1(0) = 1.0;
  const KernelMatrix k = combine(dict_eta, e1);
  return FilterState{Vector::Zero(k.matrix.rows()), k.matrix / lambda1, 0};
}

KernelMatrix combine_or_zero(const KernelDictionary& dict, const CoefficientVector& theta) {
  if (static_cast<std::size_t>(theta.size()) == dict.num_kernels() && (theta.array() == 0.0).all()) {
    const auto n = static_cast<Eigen::Index>(dict.num_nodes());
    return KernelMatrix{Matrix::Zero(n, n), Vector::Zero(n)};
  }
  return combine(dict, theta);
}

MkrikfStep mkrikf_step(const FilterState& state, const CorrelationAccumulator& acc, const ThetaPair& thetas,
                       const Observation& obs, const KernelDictionary& dict_nu, const KernelDictionary& dict_eta,
                       double lambda1, double lambda2, const Matrix& transition, const MKLConfig& mkl) {
  const FilterConfig config =
      make_filter_config(lambda1, lambda2, combine_or_zero(dict_nu, thetas.nu), combine(dict_eta, thetas.eta), transition);
  auto [next_state, estimate] = kekrikf_step(state, obs, config);

  const Vector residual = next_state.chi - transition * state.chi;
  CorrelationAccumulator next_acc = accumulate(acc, estimate.nu, residual, mkl);

  const ProjectedCorrelation r_nu = project_correlation(dict_nu.basis, next_acc.correlation_nu());
  const ProjectedCorrelation r_eta = project_correlation(dict_eta.basis, next_acc.correlation_eta());
  // theta_nu may have been matched to zero; that point is infeasible once
  // the correlation picks up mass, so restart from e_1.
  const auto warm = [](const CoefficientVector& prev, const ProjectedCorrelation& r, const KernelDictionary& d) {
    if (std::isfinite(km_objective(prev, r, d, 0.0))) return prev;
    CoefficientVector e1 = CoefficientVector::Zero(prev.size());
    e1(0) = 1.0;
    return e1;
  };
  const OkmResult okm_nu =
      okm_solve_traced(warm(thetas.nu, r_nu, dict_nu), r_nu, dict_nu, mkl.mu_theta_nu / lambda2, mkl.pgd);
  const OkmResult okm_eta =
      okm_solve_traced(warm(thetas.eta, r_eta, dict_eta), r_eta, dict_eta, mkl.mu_theta_eta / lambda1, mkl.pgd);

  MkrikfStep out;
  out.state = std::move(next_state);
  out.estimate = std::move(estimate);
  out.acc = std::move(next_acc);
  out.thetas.nu = okm_nu.theta;
  out.okm_iterations_nu = okm_nu.iterations;
  out.okm_iterations_eta = okm_eta.iterations;
  const Vector eta_spectrum = combined_spectrum(dict_eta, okm_eta.theta);
  if (!(eta_spectrum.minCoeff() > 1e-12)) {
    out.thetas.eta = thetas.eta;
    out.eta_fallback = true;
  } else {
    out.thetas.eta = okm_eta.theta;
  }
  return out;
}

}  // namespace kkf
