#include "kkf/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "kkf/io.hpp"

namespace kkf {

namespace {

enum Stream : std::uint64_t { kGraphStream = 1, kSignalStream = 2, kSamplingStream = 3, kNoiseStream = 4 };

template <class Fn>
auto at_slot(std::size_t slot, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), "slot " + std::to_string(slot) + ": " + e.detail());
  }
}

// Epoch-wise kernels and transitions for the single-kernel methods.
class EpochConfigs {
 public:
  EpochConfigs(const MethodSpec& m, const GraphSequence& graphs) : m_(m), graphs_(graphs) {
    const std::vector<EigenBasis> bases = eigenbases(graphs);
    for (std::size_t e = 0; e < bases.size(); ++e) {
      const Graph& g = graphs.snapshots()[e].graph;
      at_slot(graphs.snapshots()[e].first_slot, [&] {
        nu_.push_back(build_kernel(bases[e], m.kernel_nu));
        eta_.push_back(build_kernel(bases[e], m.kernel_eta));
        transition_.push_back(transition_matrix(m.transition, g));
        return 0;
      });
    }
  }

  FilterConfig at(std::size_t slot) const {
    const std::size_t e = graphs_.epoch_at(slot);
    const std::size_t prev = graphs_.epoch_at(slot == 0 ? 0 : slot - 1);
    return make_filter_config(m_.lambda1, m_.lambda2, nu_[e], eta_[e], transition_[prev]);
  }

  const KernelMatrix& kernel_nu(std::size_t slot) const { return nu_[graphs_.epoch_at(slot)]; }

 private:
  const MethodSpec& m_;
  const GraphSequence& graphs_;
  std::vector<KernelMatrix> nu_;
  std::vector<KernelMatrix> eta_;
  std::vector<Matrix> transition_;
};

Matrix stack_rows(const std::vector<Vector>& rows, Eigen::Index cols) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

double rel_error(const Vector& a, const Vector& b) {
  const double denom = b.norm();
  return denom > 0.0 ? (a - b).norm() / denom : (a - b).norm();
}

}  // namespace

SamplingPlan draw_sampling(std::size_t n, std::size_t s, Rng& rng) {
  if (s > n) {
    throw Error(ErrorCode::SampleCountExceedsNodes,
                "cannot sample " + std::to_string(s) + " of " + std::to_string(n) + " nodes");
  }
  IndexList all(n);
  std::iota(all.begin(), all.end(), std::size_t{0});
  SamplingPlan plan{n, {}};
  plan.indices.reserve(s);
  std::sample(all.begin(), all.end(), std::back_inserter(plan.indices), s, rng);
  std::sort(plan.indices.begin(), plan.indices.end());
  return plan;
}

Observation observe(const Vector& signal, const SamplingPlan& plan, double noise_std, std::size_t slot, Rng& rng) {
  if (static_cast<std::size_t>(signal.size()) != plan.num_nodes) {
    throw Error(ErrorCode::DimensionMismatch, "signal length does not match the sampling plan");
  }
  if (!(noise_std >= 0.0)) throw Error(ErrorCode::InvalidParameter, "noise_std must be >= 0");
  std::normal_distribution<double> normal(0.0, 1.0);
  Observation obs{slot, plan.indices, gather(signal, plan.indices)};
  for (Eigen::Index i = 0; i < obs.values.size(); ++i) obs.values(i) += noise_std * normal(rng);
  return obs;
}

NmseTerms nmse_terms(const Vector& truth, const Vector& estimate, const SamplingPlan& plan) {
  if (static_cast<std::size_t>(truth.size()) != plan.num_nodes || estimate.size() != truth.size()) {
    throw Error(ErrorCode::DimensionMismatch, "truth, estimate and plan sizes disagree");
  }
  NmseTerms t;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < truth.size(); ++i) {
    if (k < plan.indices.size() && plan.indices[k] == static_cast<std::size_t>(i)) {
      ++k;
      continue;
    }
    const double d = truth(i) - estimate(i);
    t.error += d * d;
    t.energy += truth(i) * truth(i);
  }
  return t;
}

double nmse(const Matrix& truth, const Matrix& estimates, const SamplingPlan& plan, std::size_t horizon) {
  if (truth.rows() != estimates.rows() || truth.cols() != estimates.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "truth and estimates differ in shape");
  }
  if (horizon > static_cast<std::size_t>(truth.rows())) {
    throw Error(ErrorCode::DimensionMismatch, "horizon exceeds the number of slots");
  }
  double err = 0.0, energy = 0.0;
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto r = static_cast<Eigen::Index>(t);
    const NmseTerms terms = nmse_terms(truth.row(r).transpose(), estimates.row(r).transpose(), plan);
    err += terms.error;
    energy += terms.energy;
  }
  if (energy == 0.0) throw Error(ErrorCode::ZeroDenominator, "signal is zero on every unsampled node");
  return err / energy;
}

void validate(const MethodSpec& m) {
  if (m.name.empty() || !std::all_of(m.name.begin(), m.name.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
      })) {
    throw Error(ErrorCode::InvalidParameter, "method name '" + m.name + "' must be nonempty [A-Za-z0-9_-]");
  }
  if (!(m.lambda1 > 0.0) || !(m.lambda2 > 0.0)) throw Error(ErrorCode::InvalidParameter, "lambda1, lambda2 must be > 0");
  if (m.kind == MethodKind::MKriKF) {
    if (m.dictionary_nu.empty() || m.dictionary_eta.empty()) {
      throw Error(ErrorCode::InvalidParameter, "MKriKF needs nonempty dictionaries");
    }
    validate(m.mkl);
  }
}

std::vector<FilterConfig> slot_configs(const MethodSpec& m, const GraphSequence& graphs, std::size_t horizon) {
  const EpochConfigs epochs(m, graphs);
  std::vector<FilterConfig> out;
  out.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) out.push_back(at_slot(t, [&] { return epochs.at(t); }));
  return out;
}

MethodRun run_method(const MethodSpec& m, const GraphSequence& graphs, const std::vector<Observation>& observations) {
  validate(m);
  const auto n = static_cast<Eigen::Index>(graphs.num_nodes());
  const std::size_t horizon = observations.size();
  MethodRun run;
  std::vector<Vector> estimates;
  estimates.reserve(horizon);

  if (m.kind == MethodKind::MKriKF) {
    const std::vector<EigenBasis> bases = eigenbases(graphs);
    std::vector<KernelDictionary> dict_nu, dict_eta;
    std::vector<Matrix> transition;
    for (std::size_t e = 0; e < bases.size(); ++e) {
      at_slot(graphs.snapshots()[e].first_slot, [&] {
        dict_nu.push_back(make_dictionary(bases[e], m.dictionary_nu));
        dict_eta.push_back(make_dictionary(bases[e], m.dictionary_eta));
        transition.push_back(transition_matrix(m.transition, graphs.snapshots()[e].graph));
        return 0;
      });
    }
    FilterState state = mkrikf_initial_state(dict_eta.front(), m.lambda1);
    CorrelationAccumulator acc = CorrelationAccumulator::make(graphs.num_nodes(), m.mkl.accumulator_mode);
    ThetaPair thetas = initial_thetas(dict_nu.front(), dict_eta.front());
    run.theta_nu.resize(static_cast<Eigen::Index>(horizon), thetas.nu.size());
    run.theta_eta.resize(static_cast<Eigen::Index>(horizon), thetas.eta.size());
    for (std::size_t i = 0; i < horizon; ++i) {
      const Observation& obs = observations[i];
      const std::size_t e = graphs.epoch_at(obs.slot);
      const std::size_t prev = graphs.epoch_at(obs.slot == 0 ? 0 : obs.slot - 1);
      MkrikfStep step = at_slot(obs.slot, [&] {
        return mkrikf_step(state, acc, thetas, obs, dict_nu[e], dict_eta[e], m.lambda1, m.lambda2, transition[prev],
                           m.mkl);
      });
      state = std::move(step.state);
      acc = std::move(step.acc);
      thetas = std::move(step.thetas);
      run.theta_nu.row(static_cast<Eigen::Index>(i)) = thetas.nu.transpose();
      run.theta_eta.row(static_cast<Eigen::Index>(i)) = thetas.eta.transpose();
      run.eta_fallback.push_back(step.eta_fallback);
      estimates.push_back(std::move(step.estimate.f));
    }
    run.estimates = stack_rows(estimates, n);
    return run;
  }

  const EpochConfigs epochs(m, graphs);
  if (m.kind == MethodKind::IE) {
    for (const Observation& obs : observations) {
      estimates.push_back(at_slot(obs.slot, [&]() -> Vector {
        validate(obs, graphs.num_nodes());
        if (obs.count() == 0) return Vector::Zero(n);
        return instantaneous_estimate(obs, epochs.kernel_nu(obs.slot), m.lambda2);
      }));
    }
    run.estimates = stack_rows(estimates, n);
    return run;
  }

  FilterState state;
  for (std::size_t i = 0; i < horizon; ++i) {
    const Observation& obs = observations[i];
    auto [next, est] = at_slot(obs.slot, [&] {
      const FilterConfig cfg = epochs.at(obs.slot);
      if (i == 0) state = initial_state(cfg);
      switch (m.kind) {
        case MethodKind::KfOnly: return kf_only_step(state, obs, cfg);
        case MethodKind::KkrOnly: return kkr_only_step(state, obs, cfg);
        default: return kekrikf_step(state, obs, cfg);
      }
    });
    state = std::move(next);
    estimates.push_back(std::move(est.f));
  }
  run.estimates = stack_rows(estimates, n);
  return run;
}

TrialData make_trial(const ExperimentConfig& cfg, std::size_t trial) {
  const std::uint64_t seed = cfg.seed + trial;
  TrialData data;
  const ScenarioSpec& sc = cfg.scenario;
  if (sc.synthetic) {
    Rng graph_rng = make_rng(seed, kGraphStream);
    data.graphs = kronecker_sequence(sc.kronecker, cfg.horizon, graph_rng);
    Rng signal_rng = make_rng(seed, kSignalStream);
    data.signals = gen_scenario(sc.signal, data.graphs, cfg.horizon, signal_rng).signals;
  } else {
    const Matrix all = load_signals_csv(sc.dataset.signals_path);
    if (static_cast<std::size_t>(all.rows()) < cfg.horizon) {
      throw Error(ErrorCode::ConfigInvalid, "horizon: exceeds the " + std::to_string(all.rows()) +
                                                " slots in " + sc.dataset.signals_path);
    }
    data.signals = all.topRows(static_cast<Eigen::Index>(cfg.horizon));
    const auto nodes = static_cast<std::size_t>(all.cols());
    for (const auto& [first, path] : sc.dataset.graph_paths) data.graphs.push(first, load_graph_csv(path, nodes));
  }
  Rng sampling_rng = make_rng(seed, kSamplingStream);
  data.plan = draw_sampling(data.graphs.num_nodes(), cfg.sample_count, sampling_rng);
  Rng noise_rng = make_rng(seed, kNoiseStream);
  for (std::size_t t = 1; t <= cfg.horizon; ++t) {
    data.observations.push_back(observe(data.signals.row(static_cast<Eigen::Index>(t - 1)).transpose(), data.plan,
                                        sc.noise_std, t, noise_rng));
  }
  return data;
}

RunReport run_experiment(const ExperimentConfig& cfg) {
  if (cfg.methods.empty()) throw Error(ErrorCode::ConfigInvalid, "methods: at least one method required");
  if (cfg.horizon == 0) throw Error(ErrorCode::ConfigInvalid, "horizon: must be >= 1");
  for (const MethodSpec& m : cfg.methods) validate(m);

  RunReport report;
  report.config_hash = fnv1a_hex(cfg.canonical_json);
  const std::size_t nm = cfg.methods.size();
  report.methods.resize(nm);
  std::vector<std::vector<double>> err(nm, std::vector<double>(cfg.horizon, 0.0));
  std::vector<std::vector<double>> energy(nm, std::vector<double>(cfg.horizon, 0.0));
  for (std::size_t k = 0; k < nm; ++k) report.methods[k].name = cfg.methods[k].name;
  std::optional<Error> last_error;

  for (std::size_t trial = 0; trial < cfg.trials; ++trial) {
    report.seeds.push_back(cfg.seed + trial);
    std::string stage = "scenario";
    try {
      const TrialData data = make_trial(cfg, trial);
      std::vector<MethodRun> runs;
      std::vector<double> seconds;
      for (const MethodSpec& m : cfg.methods) {
        stage = m.name;
        const auto t0 = std::chrono::steady_clock::now();
        runs.push_back(run_method(m, data.graphs, data.observations));
        seconds.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      std::vector<double> trial_nmse;
      for (std::size_t k = 0; k < nm; ++k) {
        stage = cfg.methods[k].name;
        trial_nmse.push_back(nmse(data.signals, runs[k].estimates, data.plan, cfg.horizon));
      }
      for (std::size_t k = 0; k < nm; ++k) {
        MethodSummary& s = report.methods[k];
        for (std::size_t t = 0; t < cfg.horizon; ++t) {
          const auto r = static_cast<Eigen::Index>(t);
          const NmseTerms terms =
              nmse_terms(data.signals.row(r).transpose(), runs[k].estimates.row(r).transpose(), data.plan);
          err[k][t] += terms.error;
          energy[k][t] += terms.energy;
        }
        s.trial_nmse.push_back(trial_nmse[k]);
        s.wall_seconds += seconds[k];
        if (report.completed_trials.empty()) s.first_run = std::move(runs[k]);
      }
      report.completed_trials.push_back(trial);
    } catch (const Error& e) {
      report.failures.push_back({trial, stage, e.what()});
      last_error = e;
    }
  }
  if (report.completed_trials.empty()) {
    if (last_error) throw *last_error;
    throw Error(ErrorCode::ConfigInvalid, "trials: must be >= 1");
  }

  for (std::size_t k = 0; k < nm; ++k) {
    MethodSummary& s = report.methods[k];
    double cum_err = 0.0, cum_energy = 0.0;
    for (std::size_t t = 0; t < cfg.horizon; ++t) {
      cum_err += err[k][t];
      cum_energy += energy[k][t];
      s.nmse.push_back(cum_energy > 0.0 ? cum_err / cum_energy : std::numeric_limits<double>::quiet_NaN());
      s.nmse_instant.push_back(energy[k][t] > 0.0 ? err[k][t] / energy[k][t]
                                                  : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return report;
}

void write_report(const ExperimentConfig& cfg, const RunReport& report) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(cfg.output_dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + cfg.output_dir + ": " + ec.message());
  const auto file = [&](const std::string& name) { return (fs::path(cfg.output_dir) / name).string(); };

  std::vector<std::string> names;
  std::vector<std::vector<double>> cumulative, instant;
  for (const MethodSummary& s : report.methods) {
    names.push_back(s.name);
    cumulative.push_back(s.nmse);
    instant.push_back(s.nmse_instant);
  }
  write_slot_table_csv(file("nmse.csv"), names, cumulative);
  write_slot_table_csv(file("nmse_instant.csv"), names, instant);

  nlohmann::ordered_json j;
  j["config_hash"] = report.config_hash;
  j["seeds"] = report.seeds;
  j["trials"] = cfg.trials;
  j["completed_trials"] = report.completed_trials;
  j["failures"] = nlohmann::ordered_json::array();
  for (const TrialFailure& f : report.failures) {
    j["failures"].push_back({{"trial", f.trial}, {"method", f.method}, {"message", f.message}});
  }
  nlohmann::ordered_json timing;
  for (std::size_t k = 0; k < report.methods.size(); ++k) {
    const MethodSummary& s = report.methods[k];
    const MethodSpec& m = cfg.methods[k];
    nlohmann::ordered_json mj;
    mj["final_nmse"] = s.nmse.back();
    mj["trial_nmse"] = s.trial_nmse;
    if (m.kind == MethodKind::MKriKF) {
      const MethodRun& run = s.first_run;
      std::vector<std::string> cols;
      std::vector<std::vector<double>> values;
      for (Eigen::Index p = 0; p < run.theta_nu.cols(); ++p) {
        cols.push_back("nu_" + std::to_string(p + 1));
        values.emplace_back(run.theta_nu.col(p).data(), run.theta_nu.col(p).data() + run.theta_nu.rows());
      }
      for (Eigen::Index p = 0; p < run.theta_eta.cols(); ++p) {
        cols.push_back("eta_" + std::to_string(p + 1));
        values.emplace_back(run.theta_eta.col(p).data(), run.theta_eta.col(p).data() + run.theta_eta.rows());
      }
      write_slot_table_csv(file("thetas_" + s.name + ".csv"), cols, values);
      mj["eta_fallback_slots"] = std::count(run.eta_fallback.begin(), run.eta_fallback.end(), true);
    }
    if (cfg.write_estimates) write_signals_csv(file("estimates_" + s.name + ".csv"), s.first_run.estimates);
    j["methods"][s.name] = mj;
    timing["wall_seconds"][s.name] = s.wall_seconds;
  }
  write_text_file(file("report.json"), j.dump(2) + "\n");
  write_text_file(file("timing.json"), timing.dump(2) + "\n");
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

OracleCheck run_oracle_check(const ExperimentConfig& cfg) {
  const auto it = std::find_if(cfg.methods.begin(), cfg.methods.end(),
                               [](const MethodSpec& m) { return m.kind == MethodKind::KeKriKF; });
  if (it == cfg.methods.end()) throw Error(ErrorCode::ConfigInvalid, "methods: oracle needs a kekrikf method");
  const TrialData data = make_trial(cfg, 0);
  // The batch system is dense in horizon * N unknowns; keep it small.
  const std::size_t horizon = std::clamp<std::size_t>(2000 / data.graphs.num_nodes(), 1, cfg.horizon);
  const std::vector<FilterConfig> configs = slot_configs(*it, data.graphs, horizon);
  FilterState state = initial_state(configs.front());
  SlotEstimate last;
  for (std::size_t t = 0; t < horizon; ++t) {
    auto step = kekrikf_step(state, data.observations[t], configs[t]);
    state = std::move(step.first);
    last = std::move(step.second);
  }
  const BatchSolution batch = batch_oracle(data.observations, configs, horizon);
  return OracleCheck{horizon, rel_error(last.chi, batch.chi.back()), rel_error(last.nu, batch.nu.back())};
}

}  // namespace kkf
