#include "kkf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kkf {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

Matrix default_kronecker_seed() {
  Matrix s(3, 3);
  s << 1.0, 0.1, 0.7,
       0.3, 0.1, 0.5,
       0.0, 1.0, 0.1;
  return s;
}

Matrix kronecker_expand(const Matrix& seed, int power) {
  if (power < 1) throw Error(ErrorCode::InvalidParameter, "Kronecker power must be >= 1");
  Matrix out = seed;
  for (int k = 1; k < power; ++k) {
    Matrix next(out.rows() * seed.rows(), out.cols() * seed.cols());
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      for (Eigen::Index j = 0; j < out.cols(); ++j) {
        next.block(i * seed.rows(), j * seed.cols(), seed.rows(), seed.cols()) = out(i, j) * seed;
      }
    }
    out = std::move(next);
  }
  return out;
}

Matrix draw_bernoulli_adjacency(const Matrix& probabilities, Rng& rng) {
  const Eigen::Index n = probabilities.rows();
  if (probabilities.cols() != n) throw Error(ErrorCode::DimensionMismatch, "probability matrix must be square");
  if ((probabilities.array() < 0.0).any() || (probabilities.array() > 1.0).any()) {
    throw Error(ErrorCode::InvalidParameter, "edge probabilities must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix a = Matrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (unif(rng) < probabilities(i, j)) a(i, j) = a(j, i) = 1.0;
    }
  }
  return a;
}

Graph sample_initial_adjacency(const Matrix& probabilities, Rng& rng, int max_attempts) {
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Matrix a = draw_bernoulli_adjacency(probabilities, rng);
    if (is_connected(a)) return build_graph(a);
  }
  throw Error(ErrorCode::DisconnectedAfterRetries,
              "no connected draw in " + std::to_string(max_attempts) + " attempts");
}

Graph evolve_graph(const Graph& g, std::size_t slot, const KroneckerConfig& cfg, Rng& rng) {
  Matrix a = g.adjacency();
  const Eigen::Index n = a.rows();
  bool changed = false;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  if (cfg.t_change > 0 && slot % cfg.t_change == 0) {
    const Vector degree = a.rowwise().sum();
    const double total = degree.sum();
    if (total > 0.0) {
      for (Eigen::Index i = 1; i < n; ++i) {
        for (Eigen::Index j = 0; j < i; ++j) {
          const double p = std::min(1.0, degree(i) * degree(j) / total);
          if (unif(rng) < p) {
            const double inc = std::abs(cfg.omega * normal(rng));
            a(i, j) += inc;
            a(j, i) = a(i, j);
            changed = changed || inc != 0.0;
          }
        }
      }
    }
  }

  if (cfg.t_delete > 0 && slot % cfg.t_delete == 0) {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> edges;
    for (Eigen::Index i = 1; i < n; ++i) {
      for (Eigen::Index j = 0; j < i; ++j) {
        if (a(i, j) > 0.0) edges.emplace_back(i, j);
      }
    }
    std::shuffle(edges.begin(), edges.end(), rng);
    for (const auto& [i, j] : edges) {
      if (unif(rng) >= cfg.delete_prob) continue;
      const double w = a(i, j);
      a(i, j) = a(j, i) = 0.0;
      if (is_connected(a)) {
        changed = true;
      } else {
        a(i, j) = a(j, i) = w;
      }
    }
  }
  return changed ? build_graph(a) : g;
}

GraphSequence kronecker_sequence(const KroneckerConfig& cfg, std::size_t horizon, Rng& rng) {
  if ((cfg.seed_matrix.array() < 0.0).any() || (cfg.seed_matrix.array() > 1.0).any()) {
    throw Error(ErrorCode::InvalidParameter, "seed matrix entries must lie in [0, 1]");
  }
  Graph current = sample_initial_adjacency(kronecker_expand(cfg.seed_matrix, cfg.power), rng, cfg.max_attempts);
  GraphSequence seq(current);
  for (std::size_t t = 1; t < horizon; ++t) {
    Graph next = evolve_graph(current, t, cfg, rng);
    if (!(next == current)) {
      seq.push(t + 1, next);
      current = std::move(next);
    }
  }
  return seq;
}

Vector gen_bandlimited(const EigenBasis& basis, int bandwidth, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  if (bandwidth < 0 || bandwidth > n) throw Error(ErrorCode::InvalidParameter, "bandwidth must lie in [0, N]");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector f = Vector::Zero(n);
  for (Eigen::Index i = 0; i < bandwidth; ++i) f += normal(rng) * basis.eigenvectors.col(i);
  return f;
}

std::vector<Vector> gen_trend_sequence(const GraphSequence& graphs, const TransitionSpec& trend,
                                       const KernelSpec& noise_kernel, std::size_t t_max, Rng& rng,
                                       double noise_scale) {
  const auto n = static_cast<Eigen::Index>(graphs.num_nodes());
  const std::vector<EigenBasis> bases = eigenbases(graphs);
  std::vector<Matrix> roots;
  for (const EigenBasis& basis : bases) {
    const Vector s = spectral_values(basis, noise_kernel) * noise_scale;
    if (!(s.minCoeff() > 0.0)) throw Error(ErrorCode::SingularNoiseKernel, "state-noise kernel is singular");
    roots.push_back(spectral_matrix(basis, s.cwiseSqrt()));
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Vector> chi;
  chi.reserve(t_max);
  Vector prev = Vector::Zero(n);
  for (std::size_t t = 1; t <= t_max; ++t) {
    const Matrix b = transition_matrix(trend, graphs.at(t - 1));
    Vector z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
    prev = b * prev + roots[graphs.epoch_at(t)] * z;
    chi.push_back(prev);
  }
  return chi;
}

Scenario gen_scenario(const SignalModelConfig& model, const GraphSequence& graphs, std::size_t horizon, Rng& rng) {
  const auto n = static_cast<Eigen::Index>(graphs.num_nodes());
  Scenario sc;
  sc.graphs = graphs;
  sc.signals.resize(static_cast<Eigen::Index>(horizon), n);
  const std::vector<EigenBasis> bases = eigenbases(graphs);

  if (model.model == SignalModel::BandlimitedPlusTrend) {
    sc.chi = gen_trend_sequence(graphs, model.trend_transition, model.trend_noise_kernel, horizon, rng);
    for (std::size_t t = 1; t <= horizon; ++t) {
      sc.nu.push_back(gen_bandlimited(bases[graphs.epoch_at(t)], model.bandwidth, rng));
      sc.signals.row(static_cast<Eigen::Index>(t - 1)) = (sc.nu.back() + sc.chi[t - 1]).transpose();
    }
  } else {
    if (!(model.gamma_f >= 0.0)) throw Error(ErrorCode::InvalidParameter, "gamma_f must be >= 0");
    Vector prev = Vector::Zero(n);
    for (std::size_t t = 1; t <= horizon; ++t) {
      const Vector band = gen_bandlimited(bases[graphs.epoch_at(t)], model.bandwidth, rng);
      prev = model.gamma_f * (graphs.at(t).adjacency() * prev) + band;
      sc.signals.row(static_cast<Eigen::Index>(t - 1)) = prev.transpose();
    }
  }
  return sc;
}

}  // namespace kkf
