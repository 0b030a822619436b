#pragma once

#include <span>
#include <vector>

#include <Eigen/Cholesky>

#include "kkf/graph.hpp"

namespace kkf {

using IndexList = std::vector<std::size_t>;

/// Cholesky solve with a reciprocal-condition guard. Throws `on_failure`
/// when the matrix is not numerically positive definite or its condition
/// estimate exceeds `max_condition`.
class SpdSolver {
 public:
  SpdSolver(const Matrix& a, ErrorCode on_failure, double max_condition = 1e12);

  template <typename Rhs>
  auto solve(const Rhs& b) const {
    return llt_.solve(b);
  }

 private:
  Eigen::LLT<Matrix> llt_;
};

/// x^T A^{-1} x for symmetric positive definite A.
double weighted_sq_norm(const Vector& x, const Matrix& a);

Matrix symmetrized(const Matrix& m);

Vector gather(const Vector& v, std::span<const std::size_t> idx);
Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx);
Matrix gather_cols(const Matrix& m, std::span<const std::size_t> idx);
Matrix gather_block(const Matrix& m, std::span<const std::size_t> idx);

/// Binary |idx| x n selection matrix S.
Matrix selection_matrix(std::span<const std::size_t> idx, std::size_t n);

double min_eigenvalue(const Matrix& symmetric);

}  // namespace kkf
