#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "kkf/error.hpp"

namespace kkf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Undirected weighted graph. The adjacency is symmetric, nonnegative and has
/// a zero diagonal; the only way to obtain one is through build_graph().
class Graph {
 public:
  Graph() = default;

  std::size_t num_nodes() const noexcept { return static_cast<std::size_t>(adjacency_.rows()); }
  const Matrix& adjacency() const noexcept { return adjacency_; }

  bool operator==(const Graph& other) const { return adjacency_ == other.adjacency_; }

 private:
  friend Graph build_graph(const Matrix& adjacency);
  explicit Graph(Matrix adjacency) : adjacency_(std::move(adjacency)) {}

  Matrix adjacency_;
};

/// Piecewise-constant sequence of topologies. Snapshot k is active for slots
/// [first_slot_k, first_slot_{k+1}).
class GraphSequence {
 public:
  struct Snapshot {
    std::size_t first_slot;
    Graph graph;
  };

  GraphSequence() = default;
  explicit GraphSequence(Graph g);
  explicit GraphSequence(std::vector<Snapshot> snapshots);

  /// Appends a snapshot; first_slot must exceed the last one.
  void push(std::size_t first_slot, Graph g);

  std::size_t num_nodes() const noexcept;
  const std::vector<Snapshot>& snapshots() const noexcept { return snapshots_; }

  /// Index of the snapshot active at `slot` (slots < 1 map to the first).
  std::size_t epoch_at(std::size_t slot) const;
  const Graph& at(std::size_t slot) const { return snapshots_[epoch_at(slot)].graph; }

 private:
  std::vector<Snapshot> snapshots_;
};

/// Orthonormal Laplacian eigenvectors (columns) with ascending eigenvalues.
struct EigenBasis {
  Matrix eigenvectors;
  Vector eigenvalues;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
};

enum class TransitionForm { ScaledIdentity, ScaledAdjacency, ScaledAdjacencyPlusIdentity, ExplicitMatrix };

struct TransitionSpec {
  TransitionForm form = TransitionForm::ScaledIdentity;
  double alpha = 1.0;
  std::optional<Matrix> matrix;
};

/// Binary path-by-link incidence; entry (n, l) is 1 when path n uses link l.
struct RoutingMatrix {
  Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic> entries;
};

Graph build_graph(const Matrix& adjacency);

Matrix laplacian(const Graph& g);

/// Ascending eigenvalues; each eigenvector's largest-magnitude entry (lowest
/// index on ties) is made nonnegative so output is reproducible.
EigenBasis eigendecompose(const Matrix& laplacian);

Matrix transition_matrix(const TransitionSpec& spec, const Graph& g);

/// Jaccard overlap of the link sets of every pair of paths.
Graph graph_from_routing(const RoutingMatrix& r);

Vector graph_fourier_transform(const EigenBasis& basis, const Vector& signal);

bool is_connected(const Matrix& adjacency);

/// Laplacian eigenbasis of every snapshot, in snapshot order.
std::vector<EigenBasis> eigenbases(const GraphSequence& graphs);

}  // namespace kkf
