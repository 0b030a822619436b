#pragma once

// Data-parallel inner loops of kernel matching and correlation tracking.
//
// Every routine has a scalar reference implementation and, where the
// platform allows, an AVX2/FMA variant. The variant is picked once at
// runtime from CPUID; setting KKF_SIMD=scalar in the environment pins the
// reference path. Variants agree with the reference to rounding (reduction
// order differs), which the equivalence tests bound.

#include <cstddef>
#include <string_view>

namespace kkf::simd {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa) noexcept;

struct SpectralOps {
  Isa isa;
  /// y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  /// sum_i r[i] / lam[i] over entries with r[i] != 0; +infinity when such
  /// an entry has lam[i] <= 0.
  double (*reciprocal_weighted_sum)(const double* r, const double* lam, std::size_t n);
  /// w[i] = r[i] / lam[i]^2, and 0 where r[i] == 0.
  void (*inverse_square_weights)(const double* r, const double* lam, double* w, std::size_t n);
  /// sigma <- gamma * sigma + v v^T on a column-major n x n buffer.
  void (*decay_rank1)(double gamma, const double* v, double* sigma, std::size_t n);
};

const SpectralOps& scalar_ops() noexcept;

/// nullptr when the CPU (or the build target) lacks AVX2+FMA.
const SpectralOps* avx2_ops() noexcept;

/// The table used by the library.
const SpectralOps& active() noexcept;

/// Overrides the runtime choice; falls back to scalar if `isa` is unavailable.
void select(Isa isa) noexcept;

}  // namespace kkf::simd
