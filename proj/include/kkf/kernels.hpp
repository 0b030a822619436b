#pragma once

#include <optional>
#include <vector>

#include "kkf/graph.hpp"

namespace kkf {

enum class KernelFamily { Diffusion, PStepRandomWalk, RegularizedLaplacian, Bandlimited, BandRejection, Identity };

/// A spectral weight family and its parameters. Unused fields are ignored.
struct KernelSpec {
  KernelFamily family = KernelFamily::Identity;
  double sigma2 = 0.0;    // diffusion, regularized
  double a = 2.0;         // p-step
  int p = 1;              // p-step
  double beta = 1.0;      // bandlimited, band-rejection
  int bandwidth = 1;      // bandlimited
  int k = 1;              // band-rejection
  int l = 1;              // band-rejection

  static KernelSpec diffusion(double sigma2) { return {KernelFamily::Diffusion, sigma2}; }
  static KernelSpec p_step(double a, int p) {
    KernelSpec s{KernelFamily::PStepRandomWalk};
    s.a = a;
    s.p = p;
    return s;
  }
  static KernelSpec regularized(double sigma2) { return {KernelFamily::RegularizedLaplacian, sigma2}; }
  static KernelSpec bandlimited(double beta, int bandwidth) {
    KernelSpec s{KernelFamily::Bandlimited};
    s.beta = beta;
    s.bandwidth = bandwidth;
    return s;
  }
  static KernelSpec band_rejection(double beta, int k, int l) {
    KernelSpec s{KernelFamily::BandRejection};
    s.beta = beta;
    s.k = k;
    s.l = l;
    return s;
  }
  static KernelSpec identity() { return {}; }
};

/// Checks parameter bounds against a graph of `n_total` nodes.
void validate(const KernelSpec& spec, std::size_t n_total);

/// r(lambda) for the family. `index` is the 1-based eigenvalue position,
/// which is what the bandlimited and band-rejection families depend on.
double spectral_weight(const KernelSpec& spec, double lambda, std::size_t index, std::size_t n_total);

/// Symmetric PSD kernel. spectral_values holds r^dagger(lambda_n) when the
/// kernel was built over an EigenBasis.
struct KernelMatrix {
  Matrix matrix;
  std::optional<Vector> spectral_values;

  std::size_t size() const noexcept { return static_cast<std::size_t>(matrix.rows()); }

  /// Wraps an arbitrary PSD matrix (non-Laplacian kernels).
  static KernelMatrix from_matrix(Matrix m);
};

/// U diag(values) U^T, symmetrized.
Matrix spectral_matrix(const EigenBasis& basis, const Vector& values);

Vector spectral_values(const EigenBasis& basis, const KernelSpec& spec);

KernelMatrix build_kernel(const EigenBasis& basis, const KernelSpec& spec);

/// P Laplacian kernels sharing one basis, stored by spectrum: row p of
/// `spectra` is r^dagger_p(lambda_1..N). All entries are strictly positive.
struct KernelDictionary {
  EigenBasis basis;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> spectra;

  std::size_t num_kernels() const noexcept { return static_cast<std::size_t>(spectra.rows()); }
  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(spectra.cols()); }
};

KernelDictionary make_dictionary(const EigenBasis& basis, const std::vector<KernelSpec>& specs);

/// Nonnegative dictionary coefficients theta.
using CoefficientVector = Vector;

/// Lambda(theta)_n = sum_p theta_p * spectra(p, n).
Vector combined_spectrum(const KernelDictionary& dict, const CoefficientVector& theta);

KernelMatrix combine(const KernelDictionary& dict, const CoefficientVector& theta);

}  // namespace kkf
