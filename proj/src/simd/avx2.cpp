#include <limits>

#include "kkf/simd/spectral_ops.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define KKF_HAVE_X86 1
#include <immintrin.h>
#else
#define KKF_HAVE_X86 0
#endif

namespace kkf::simd {

#if KKF_HAVE_X86

namespace {

#define KKF_AVX2 __attribute__((target("avx2,fma")))

KKF_AVX2 inline double fma1(double a, double b, double c) {
  return _mm_cvtsd_f64(_mm_fmadd_sd(_mm_set_sd(a), _mm_set_sd(b), _mm_set_sd(c)));
}

KKF_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

KKF_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = fma1(a, x[i], y[i]);
}

KKF_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s = fma1(x[i], y[i], s);
  return s;
}

KKF_AVX2 double reciprocal_weighted_sum(const double* r, const double* lam, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = zero;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_loadu_pd(lam + i);
    const __m256d rv = _mm256_loadu_pd(r + i);
    const __m256d active = _mm256_cmp_pd(rv, zero, _CMP_NEQ_UQ);
    // NaN and nonpositive weights fail the ordered greater-than test.
    const __m256d feasible = _mm256_cmp_pd(l, zero, _CMP_GT_OQ);
    if (_mm256_movemask_pd(_mm256_andnot_pd(feasible, active)) != 0) {
      return std::numeric_limits<double>::infinity();
    }
    acc = _mm256_add_pd(acc, _mm256_and_pd(active, _mm256_div_pd(rv, l)));
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    if (r[i] == 0.0) continue;
    if (!(lam[i] > 0.0)) return std::numeric_limits<double>::infinity();
    s += r[i] / lam[i];
  }
  return s;
}

KKF_AVX2 void inverse_square_weights(const double* r, const double* lam, double* w, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d l = _mm256_loadu_pd(lam + i);
    const __m256d rv = _mm256_loadu_pd(r + i);
    const __m256d active = _mm256_cmp_pd(rv, _mm256_setzero_pd(), _CMP_NEQ_UQ);
    _mm256_storeu_pd(w + i, _mm256_and_pd(active, _mm256_div_pd(rv, _mm256_mul_pd(l, l))));
  }
  for (; i < n; ++i) w[i] = r[i] == 0.0 ? 0.0 : r[i] / (lam[i] * lam[i]);
}

KKF_AVX2 void decay_rank1(double gamma, const double* v, double* sigma, std::size_t n) {
  const __m256d g = _mm256_set1_pd(gamma);
  for (std::size_t j = 0; j < n; ++j) {
    double* col = sigma + j * n;
    const double vj = v[j];
    const __m256d bj = _mm256_set1_pd(vj);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
      const __m256d decayed = _mm256_mul_pd(g, _mm256_loadu_pd(col + i));
      _mm256_storeu_pd(col + i, _mm256_fmadd_pd(_mm256_loadu_pd(v + i), bj, decayed));
    }
    // fma in the tail as well, so (i, j) and (j, i) round identically.
    for (; i < n; ++i) col[i] = fma1(v[i], vj, gamma * col[i]);
  }
}

#undef KKF_AVX2

constexpr SpectralOps kAvx2{Isa::Avx2, axpy, dot, reciprocal_weighted_sum, inverse_square_weights,
                            decay_rank1};

}  // namespace

const SpectralOps* avx2_ops() noexcept {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &kAvx2 : nullptr;
}

#else

const SpectralOps* avx2_ops() noexcept { return nullptr; }

#endif

}  // namespace kkf::simd
