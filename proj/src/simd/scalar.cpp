#include <limits>

#include "kkf/simd/spectral_ops.hpp"

namespace kkf::simd {

namespace {

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double reciprocal_weighted_sum(const double* r, const double* lam, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (r[i] == 0.0) continue;
    if (!(lam[i] > 0.0)) return std::numeric_limits<double>::infinity();
    s += r[i] / lam[i];
  }
  return s;
}

void inverse_square_weights(const double* r, const double* lam, double* w, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) w[i] = r[i] == 0.0 ? 0.0 : r[i] / (lam[i] * lam[i]);
}

void decay_rank1(double gamma, const double* v, double* sigma, std::size_t n) {
  for (std::size_t j = 0; j < n; ++j) {
    double* col = sigma + j * n;
    const double vj = v[j];
    for (std::size_t i = 0; i < n; ++i) col[i] = gamma * col[i] + v[i] * vj;
  }
}

constexpr SpectralOps kScalar{Isa::Scalar, axpy, dot, reciprocal_weighted_sum, inverse_square_weights,
                              decay_rank1};

}  // namespace

const SpectralOps& scalar_ops() noexcept { return kScalar; }

}  // namespace kkf::simd
