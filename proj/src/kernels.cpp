#include "kkf/kernels.hpp"

#include <cmath>
#include <string>

#include "kkf/simd/spectral_ops.hpp"

namespace kkf {

namespace {

constexpr double kPinvThreshold = 1e-12;

[[noreturn]] void bad_param(const std::string& msg) { throw Error(ErrorCode::InvalidParameter, msg); }

}  // namespace

void validate(const KernelSpec& spec, std::size_t n_total) {
  const auto n = static_cast<long>(n_total);
  switch (spec.family) {
    case KernelFamily::Diffusion:
    case KernelFamily::RegularizedLaplacian:
      if (!(spec.sigma2 >= 0.0)) bad_param("sigma2 must be >= 0");
      break;
    case KernelFamily::PStepRandomWalk:
      if (!(spec.a >= 2.0)) bad_param("p-step requires a >= 2");
      if (spec.p < 1) bad_param("p-step requires p >= 1");
      break;
    case KernelFamily::Bandlimited:
      if (!(spec.beta > 0.0)) bad_param("bandlimited requires beta > 0");
      if (spec.bandwidth < 1 || spec.bandwidth > n) bad_param("bandlimited requires 1 <= B <= N");
      break;
    case KernelFamily::BandRejection:
      if (!(spec.beta > 0.0)) bad_param("band-rejection requires beta > 0");
      if (spec.k < 1 || spec.l < 1 || spec.k > n - spec.l) bad_param("band-rejection requires 1 <= k <= N - l");
      break;
    case KernelFamily::Identity:
      break;
  }
}

double spectral_weight(const KernelSpec& spec, double lambda, std::size_t index, std::size_t n_total) {
  switch (spec.family) {
    case KernelFamily::Diffusion:
      return std::exp(spec.sigma2 * lambda / 2.0);
    case KernelFamily::PStepRandomWalk:
      if (spec.a <= lambda) {
        throw Error(ErrorCode::PStepPole, "a = " + std::to_string(spec.a) + " <= lambda = " + std::to_string(lambda));
      }
      return std::pow(spec.a - lambda, -spec.p);
    case KernelFamily::RegularizedLaplacian:
      return 1.0 + spec.sigma2 * lambda;
    case KernelFamily::Bandlimited:
      return index <= static_cast<std::size_t>(spec.bandwidth) ? 1.0 / spec.beta : spec.beta;
    case KernelFamily::BandRejection: {
      const auto lo = static_cast<std::size_t>(spec.k);
      const auto hi = n_total - static_cast<std::size_t>(spec.l);
      return (index >= lo && index <= hi) ? spec.beta : 1.0 / spec.beta;
    }
    case KernelFamily::Identity:
      return 1.0;
  }
  bad_param("unknown kernel family");
}

KernelMatrix KernelMatrix::from_matrix(Matrix m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "kernel matrix must be square");
  Matrix sym = 0.5 * (m + m.transpose());
  return KernelMatrix{std::move(sym), std::nullopt};
}

Matrix spectral_matrix(const EigenBasis& basis, const Vector& values) {
  const Matrix& u = basis.eigenvectors;
  Matrix k = u * values.asDiagonal() * u.transpose();
  return 0.5 * (k + k.transpose());
}

Vector spectral_values(const EigenBasis& basis, const KernelSpec& spec) {
  const std::size_t n = basis.size();
  validate(spec, n);
  Vector values(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double r = spectral_weight(spec, basis.eigenvalues(static_cast<Eigen::Index>(i)), i + 1, n);
    values(static_cast<Eigen::Index>(i)) = r > kPinvThreshold ? 1.0 / r : 0.0;
  }
  return values;
}

KernelMatrix build_kernel(const EigenBasis& basis, const KernelSpec& spec) {
  Vector values = spectral_values(basis, spec);
  if (values.size() > 0 && values.maxCoeff() == 0.0) {
    throw Error(ErrorCode::DegenerateKernel, "all spectral values vanish");
  }
  Matrix k = spectral_matrix(basis, values);
  return KernelMatrix{std::move(k), std::move(values)};
}

KernelDictionary make_dictionary(const EigenBasis& basis, const std::vector<KernelSpec>& specs) {
  if (specs.empty()) throw Error(ErrorCode::InvalidParameter, "dictionary needs at least one kernel");
  KernelDictionary dict{basis, {}};
  dict.spectra.resize(static_cast<Eigen::Index>(specs.size()), static_cast<Eigen::Index>(basis.size()));
  for (std::size_t p = 0; p < specs.size(); ++p) {
    const Vector values = spectral_values(basis, specs[p]);
    if (values.size() > 0 && !(values.minCoeff() > 0.0)) {
      throw Error(ErrorCode::DegenerateKernel,
                  "dictionary kernel " + std::to_string(p) + " has a nonpositive spectral value");
    }
    dict.spectra.row(static_cast<Eigen::Index>(p)) = values.transpose();
  }
  return dict;
}

Vector combined_spectrum(const KernelDictionary& dict, const CoefficientVector& theta) {
  if (static_cast<std::size_t>(theta.size()) != dict.num_kernels()) {
    throw Error(ErrorCode::DimensionMismatch, "theta has " + std::to_string(theta.size()) +
                                                  " entries for " + std::to_string(dict.num_kernels()) +
                                                  " kernels");
  }
  const auto& ops = simd::active();
  const std::size_t n = dict.num_nodes();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(n));
  for (Eigen::Index p = 0; p < theta.size(); ++p) {
    if (theta(p) != 0.0) ops.axpy(theta(p), dict.spectra.row(p).data(), out.data(), n);
  }
  return out;
}

KernelMatrix combine(const KernelDictionary& dict, const CoefficientVector& theta) {
  if (static_cast<std::size_t>(theta.size()) == dict.num_kernels()) {
    if ((theta.array() < 0.0).any()) throw Error(ErrorCode::InvalidParameter, "theta must be nonnegative");
    if (!(theta.array() > 0.0).any()) throw Error(ErrorCode::AllZeroCoefficients, "all coefficients are zero");
  }
  Vector values = combined_spectrum(dict, theta);
  Matrix k = spectral_matrix(dict.basis, values);
  return KernelMatrix{std::move(k), std::move(values)};
}

}  // namespace kkf
