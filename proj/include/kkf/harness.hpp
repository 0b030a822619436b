#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kkf/multikernel.hpp"
#include "kkf/synth.hpp"

namespace kkf {

/// Node indices observed at every slot.
struct SamplingPlan {
  std::size_t num_nodes = 0;
  IndexList indices;  // distinct, sorted
};

SamplingPlan draw_sampling(std::size_t n, std::size_t s, Rng& rng);

Observation observe(const Vector& signal, const SamplingPlan& plan, double noise_std, std::size_t slot, Rng& rng);

/// Squared error and signal energy on the unsampled nodes at one slot.
struct NmseTerms {
  double error = 0.0;
  double energy = 0.0;
};

NmseTerms nmse_terms(const Vector& truth, const Vector& estimate, const SamplingPlan& plan);

/// Cumulative NMSE over slots 1..horizon; rows of `truth` and `estimates` are
/// slots.
double nmse(const Matrix& truth, const Matrix& estimates, const SamplingPlan& plan, std::size_t horizon);

enum class MethodKind { KeKriKF, MKriKF, IE, KfOnly, KkrOnly };

/// One estimator and its parameters. kernel_nu / kernel_eta serve the
/// single-kernel methods (IE uses kernel_nu); the dictionaries serve MKriKF.
struct MethodSpec {
  std::string name;
  MethodKind kind = MethodKind::KeKriKF;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  KernelSpec kernel_nu = KernelSpec::identity();
  KernelSpec kernel_eta = KernelSpec::identity();
  TransitionSpec transition;
  std::vector<KernelSpec> dictionary_nu;
  std::vector<KernelSpec> dictionary_eta;
  MKLConfig mkl;
};

void validate(const MethodSpec& m);

/// Per-slot filter configurations for slots 1..horizon. Kernels follow the
/// topology active at t, the transition the one active at t-1.
std::vector<FilterConfig> slot_configs(const MethodSpec& m, const GraphSequence& graphs, std::size_t horizon);

struct MethodRun {
  Matrix estimates;    // T x N
  Matrix theta_nu;     // T x P_nu, MKriKF only
  Matrix theta_eta;    // T x P_eta, MKriKF only
  std::vector<bool> eta_fallback;
};

/// Drives the method over observations[0..T). At each topology change the
/// kernels (or dictionaries) are rebuilt on the new eigenbasis while the
/// state, error covariance, accumulators and thetas carry over.
MethodRun run_method(const MethodSpec& m, const GraphSequence& graphs, const std::vector<Observation>& observations);

struct DatasetSpec {
  std::string signals_path;
  std::vector<std::pair<std::size_t, std::string>> graph_paths;  // (first slot, edge-list path)
};

struct ScenarioSpec {
  bool synthetic = true;
  KroneckerConfig kronecker;
  SignalModelConfig signal;
  DatasetSpec dataset;
  double noise_std = 0.0;
};

struct ExperimentConfig {
  ScenarioSpec scenario;
  std::vector<MethodSpec> methods;
  std::size_t sample_count = 0;
  std::size_t trials = 1;
  std::size_t horizon = 1;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  bool write_estimates = false;
  std::string canonical_json;  // hashed into the report
};

/// One trial's ground truth, sampling and observations.
struct TrialData {
  GraphSequence graphs;
  Matrix signals;  // T x N
  SamplingPlan plan;
  std::vector<Observation> observations;
};

/// Trial `trial` uses seed + trial with separate streams for the graph, the
/// signal, the sampling set and the measurement noise.
TrialData make_trial(const ExperimentConfig& cfg, std::size_t trial);

struct MethodSummary {
  std::string name;
  std::vector<double> nmse;          // cumulative, slots 1..T
  std::vector<double> nmse_instant;  // per slot
  std::vector<double> trial_nmse;    // cumulative at T for each completed trial
  MethodRun first_run;               // run from the first completed trial
  double wall_seconds = 0.0;
};

struct TrialFailure {
  std::size_t trial = 0;
  std::string method;
  std::string message;
};

struct RunReport {
  std::vector<MethodSummary> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<std::size_t> completed_trials;
  std::vector<TrialFailure> failures;
  std::string config_hash;
};

/// Runs every trial and aggregates. NMSE curves are ratios of the trial-mean
/// error and trial-mean energy. A trial in which any method fails is
/// recorded and left out of every method's aggregate; if all trials fail the
/// last error is rethrown.
RunReport run_experiment(const ExperimentConfig& cfg);

/// Writes nmse.csv, nmse_instant.csv, thetas_<m>.csv, estimates_<m>.csv
/// (optional), report.json and timing.json into cfg.output_dir.
void write_report(const ExperimentConfig& cfg, const RunReport& report);

/// 64-bit FNV-1a, hex encoded.
std::string fnv1a_hex(const std::string& data);

/// Filtered versus batch estimates for the first KeKriKF method on trial 0,
/// at slot min(horizon, 2000 / N).
struct OracleCheck {
  std::size_t horizon = 0;
  double chi_rel_error = 0.0;
  double nu_rel_error = 0.0;
};

OracleCheck run_oracle_check(const ExperimentConfig& cfg);

}  // namespace kkf
