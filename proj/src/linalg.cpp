#include "kkf/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <string>

namespace kkf {

SpdSolver::SpdSolver(const Matrix& a, ErrorCode on_failure, double max_condition) : llt_(a) {
  if (a.rows() == 0) return;
  if (llt_.info() != Eigen::Success) {
    throw Error(on_failure, "matrix is not positive definite");
  }
  const double rcond = llt_.rcond();
  if (!(rcond * max_condition >= 1.0)) {
    throw Error(on_failure, "condition estimate " + std::to_string(1.0 / rcond) + " exceeds bound");
  }
}

double weighted_sq_norm(const Vector& x, const Matrix& a) {
  const SpdSolver solver(a, ErrorCode::SingularKernel);
  return x.dot(solver.solve(x));
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

Vector gather(const Vector& v, std::span<const std::size_t> idx) {
  Vector out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Matrix gather_rows(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Matrix gather_cols(const Matrix& m, std::span<const std::size_t> idx) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(idx[j]));
  return out;
}

Matrix gather_block(const Matrix& m, std::span<const std::size_t> idx) {
  const auto s = static_cast<Eigen::Index>(idx.size());
  Matrix out(s, s);
  for (Eigen::Index j = 0; j < s; ++j) {
    for (Eigen::Index i = 0; i < s; ++i) {
      out(i, j) = m(static_cast<Eigen::Index>(idx[static_cast<std::size_t>(i)]),
                    static_cast<Eigen::Index>(idx[static_cast<std::size_t>(j)]));
    }
  }
  return out;
}

Matrix selection_matrix(std::span<const std::size_t> idx, std::size_t n) {
  Matrix s = Matrix::Zero(static_cast<Eigen::Index>(idx.size()), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < idx.size(); ++i) s(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(idx[i])) = 1.0;
  return s;
}

double min_eigenvalue(const Matrix& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace kkf
