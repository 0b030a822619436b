#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "kkf/kernels.hpp"

namespace kkf {

using Rng = std::mt19937_64;

/// Builds an engine from a base seed and a stream tag, so independent
/// consumers of one trial seed do not share draws.
Rng make_rng(std::uint64_t seed, std::uint64_t stream);

Matrix default_kronecker_seed();

struct KroneckerConfig {
  Matrix seed_matrix = default_kronecker_seed();
  int power = 4;
  double omega = 0.0;          // std of the |delta| weight increments
  std::size_t t_change = 10;   // perturbation period
  std::size_t t_delete = 20;   // deletion period
  double delete_prob = 0.1;
  int max_attempts = 10000;    // connected redraws of the initial graph
  std::uint64_t rng_seed = 0;
};

enum class SignalModel { BandlimitedPlusTrend, AutoregressivePlusBandlimited };

struct SignalModelConfig {
  SignalModel model = SignalModel::BandlimitedPlusTrend;
  int bandwidth = 5;
  TransitionSpec trend_transition{TransitionForm::ScaledAdjacencyPlusIdentity, 0.03, std::nullopt};
  KernelSpec trend_noise_kernel = KernelSpec::diffusion(0.25);
  double gamma_f = 1e-2;
  double noise_std = 0.0;
  std::uint64_t rng_seed = 0;
};

/// seed (x) seed (x) ... (power factors).
Matrix kronecker_expand(const Matrix& seed, int power);

/// One draw: lower-triangular Bernoulli entries mirrored upward.
Matrix draw_bernoulli_adjacency(const Matrix& probabilities, Rng& rng);

/// draw_bernoulli_adjacency repeated until the result is connected.
Graph sample_initial_adjacency(const Matrix& probabilities, Rng& rng, int max_attempts = 10000);

/// Applies the epoch rules for `slot`: degree-product-weighted |delta|
/// increments when slot % t_change == 0, connectivity-preserving random
/// deletions when slot % t_delete == 0.
Graph evolve_graph(const Graph& g, std::size_t slot, const KroneckerConfig& cfg, Rng& rng);

/// Graphs for slots 1..horizon; a new snapshot starts whenever the topology
/// changed after the previous slot.
GraphSequence kronecker_sequence(const KroneckerConfig& cfg, std::size_t horizon, Rng& rng);

/// sum_{i <= B} gamma_i u_i with gamma_i ~ N(0, 1).
Vector gen_bandlimited(const EigenBasis& basis, int bandwidth, Rng& rng);

/// chi(0) = 0, chi(t) = B(t) chi(t-1) + eta(t), eta(t) ~ N(0, K_eta(t)).
/// B(t) is built from the topology active at slot t-1. `noise_scale`
/// multiplies K_eta.
std::vector<Vector> gen_trend_sequence(const GraphSequence& graphs, const TransitionSpec& trend,
                                       const KernelSpec& noise_kernel, std::size_t t_max, Rng& rng,
                                       double noise_scale = 1.0);

struct Scenario {
  GraphSequence graphs;
  Matrix signals;                 // T x N
  std::vector<Vector> nu;         // ground-truth split (bandlimited_plus_trend only)
  std::vector<Vector> chi;
};

Scenario gen_scenario(const SignalModelConfig& model, const GraphSequence& graphs, std::size_t horizon, Rng& rng);

}  // namespace kkf
