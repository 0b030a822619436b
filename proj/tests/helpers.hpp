#pragma once

#include <algorithm>
#include <random>

#include "kkf/graph.hpp"

namespace kkf::test {

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo = 0.0, double hi = 1.0) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

inline Vector gaussian_vector(Eigen::Index n, Rng& rng) { return gaussian_matrix(n, 1, rng).col(0); }

// G G^T / n + floor * I.
inline Matrix random_spd(Eigen::Index n, Rng& rng, double floor = 0.1) {
  const Matrix g = gaussian_matrix(n, n, rng);
  const Matrix m = g * g.transpose() / static_cast<double>(n) + floor * Matrix::Identity(n, n);
  return 0.5 * (m + m.transpose());
}

// Connected: a random spanning path plus extra edges with probability p.
inline Matrix random_adjacency(Eigen::Index n, Rng& rng, double p = 0.3) {
  Matrix a = Matrix::Zero(n, n);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 1; k < order.size(); ++k) {
    const double w = uniform(rng, 0.2, 1.5);
    a(order[k - 1], order[k]) = a(order[k], order[k - 1]) = w;
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (a(i, j) == 0.0 && uniform(rng) < p) a(i, j) = a(j, i) = uniform(rng, 0.2, 1.5);
  return a;
}

inline EigenBasis random_basis(Eigen::Index n, Rng& rng, double p = 0.3) {
  return eigendecompose(laplacian(build_graph(random_adjacency(n, rng, p))));
}

inline double rel_diff(const Matrix& a, const Matrix& b) {
  const double d = b.norm();
  return d > 0 ? (a - b).norm() / d : (a - b).norm();
}

}  // namespace kkf::test
