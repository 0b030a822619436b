#include "kkf/graph.hpp"

#include <cmath>
#include <queue>
#include <string>

namespace kkf {

namespace {

std::string pair_str(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

constexpr double kSymmetryTol = 1e-12;

}  // namespace

Graph build_graph(const Matrix& adjacency) {
  if (adjacency.rows() != adjacency.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "adjacency must be square, got " +
                                                  std::to_string(adjacency.rows()) + "x" +
                                                  std::to_string(adjacency.cols()));
  }
  const Eigen::Index n = adjacency.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double a = adjacency(i, j);
      if (!std::isfinite(a) || a < 0.0) {
        throw Error(ErrorCode::NegativeWeight, "negative or non-finite weight at " + pair_str(i, j));
      }
      if (i == j && a != 0.0) {
        throw Error(ErrorCode::NonzeroDiagonal, "nonzero diagonal at " + pair_str(i, j));
      }
      if (j > i && std::abs(a - adjacency(j, i)) > kSymmetryTol) {
        throw Error(ErrorCode::NonSymmetric, "asymmetric entries at " + pair_str(i, j));
      }
    }
  }
  Matrix sym = 0.5 * (adjacency + adjacency.transpose());
  return Graph(std::move(sym));
}

Matrix laplacian(const Graph& g) {
  const Matrix& a = g.adjacency();
  Matrix l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

EigenBasis eigendecompose(const Matrix& lap) {
  if (lap.rows() != lap.cols()) {
    throw Error(ErrorCode::NotSymmetric, "matrix is not square");
  }
  const double scale = std::max(1.0, lap.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < lap.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < lap.cols(); ++j) {
      if (std::abs(lap(i, j) - lap(j, i)) > 1e-12 * scale) {
        throw Error(ErrorCode::NotSymmetric, "asymmetric entries at " + pair_str(i, j));
      }
    }
  }
  // SelfAdjointEigenSolver returns eigenvalues in increasing order.
  Eigen::SelfAdjointEigenSolver<Matrix> solver(lap);
  EigenBasis basis{solver.eigenvectors(), solver.eigenvalues()};
  for (Eigen::Index k = 0; k < basis.eigenvalues.size(); ++k) {
    if (basis.eigenvalues(k) < 0.0 && basis.eigenvalues(k) > -1e-10) basis.eigenvalues(k) = 0.0;
    auto col = basis.eigenvectors.col(k);
    const double peak = col.cwiseAbs().maxCoeff();
    Eigen::Index pivot = 0;
    while (std::abs(col(pivot)) < peak * (1.0 - 1e-12)) ++pivot;
    if (col(pivot) < 0.0) col = -col;
  }
  return basis;
}

Matrix transition_matrix(const TransitionSpec& spec, const Graph& g) {
  const auto n = static_cast<Eigen::Index>(g.num_nodes());
  switch (spec.form) {
    case TransitionForm::ScaledIdentity:
      return spec.alpha * Matrix::Identity(n, n);
    case TransitionForm::ScaledAdjacency:
      return spec.alpha * g.adjacency();
    case TransitionForm::ScaledAdjacencyPlusIdentity:
      return spec.alpha * (g.adjacency() + Matrix::Identity(n, n));
    case TransitionForm::ExplicitMatrix:
      if (!spec.matrix || spec.matrix->rows() != n || spec.matrix->cols() != n) {
        throw Error(ErrorCode::DimensionMismatch,
                    "explicit transition matrix must be " + std::to_string(n) + "x" + std::to_string(n));
      }
      return *spec.matrix;
  }
  throw Error(ErrorCode::InvalidParameter, "unknown transition form");
}

Graph graph_from_routing(const RoutingMatrix& r) {
  const Eigen::Index paths = r.entries.rows();
  Eigen::MatrixXd inc = r.entries.cast<double>();
  Eigen::VectorXd counts = inc.rowwise().sum();
  for (Eigen::Index i = 0; i < paths; ++i) {
    if (counts(i) == 0.0) throw Error(ErrorCode::EmptyPath, "path " + std::to_string(i) + " traverses no link");
  }
  const Matrix shared = inc * inc.transpose();
  Matrix a = Matrix::Zero(paths, paths);
  for (Eigen::Index i = 0; i < paths; ++i) {
    for (Eigen::Index j = 0; j < paths; ++j) {
      if (i == j) continue;
      a(i, j) = shared(i, j) / (counts(i) + counts(j) - shared(i, j));
    }
  }
  return build_graph(a);
}

Vector graph_fourier_transform(const EigenBasis& basis, const Vector& signal) {
  if (signal.size() != basis.eigenvectors.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "signal length " + std::to_string(signal.size()) +
                                                  " does not match basis size " +
                                                  std::to_string(basis.eigenvectors.rows()));
  }
  return basis.eigenvectors.transpose() * signal;
}

bool is_connected(const Matrix& adjacency) {
  const Eigen::Index n = adjacency.rows();
  if (n <= 1) return true;
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Eigen::Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Eigen::Index reached = 1;
  while (!frontier.empty()) {
    const Eigen::Index u = frontier.front();
    frontier.pop();
    for (Eigen::Index v = 0; v < n; ++v) {
      if (!seen[static_cast<std::size_t>(v)] && adjacency(u, v) > 0.0) {
        seen[static_cast<std::size_t>(v)] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

std::vector<EigenBasis> eigenbases(const GraphSequence& graphs) {
  std::vector<EigenBasis> out;
  out.reserve(graphs.snapshots().size());
  for (const auto& snap : graphs.snapshots()) out.push_back(eigendecompose(laplacian(snap.graph)));
  return out;
}

GraphSequence::GraphSequence(Graph g) { snapshots_.push_back({1, std::move(g)}); }

GraphSequence::GraphSequence(std::vector<Snapshot> snapshots) {
  for (auto& s : snapshots) push(s.first_slot, std::move(s.graph));
}

void GraphSequence::push(std::size_t first_slot, Graph g) {
  if (snapshots_.empty()) {
    if (first_slot != 1) throw Error(ErrorCode::InvalidParameter, "first snapshot must start at slot 1");
  } else {
    if (first_slot <= snapshots_.back().first_slot) {
      throw Error(ErrorCode::InvalidParameter, "snapshot slots must be strictly increasing");
    }
    if (g.num_nodes() != num_nodes()) {
      throw Error(ErrorCode::DimensionMismatch, "all snapshots must share the node count");
    }
  }
  snapshots_.push_back({first_slot, std::move(g)});
}

std::size_t GraphSequence::num_nodes() const noexcept {
  return snapshots_.empty() ? 0 : snapshots_.front().graph.num_nodes();
}

std::size_t GraphSequence::epoch_at(std::size_t slot) const {
  if (snapshots_.empty()) throw Error(ErrorCode::InvalidParameter, "empty graph sequence");
  std::size_t k = 0;
  while (k + 1 < snapshots_.size() && snapshots_[k + 1].first_slot <= slot) ++k;
  return k;
}

}  // namespace kkf
