#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "kkf/config.hpp"
#include "kkf/io.hpp"

namespace {

using namespace kkf;

int cmd_run(const std::string& config_path, const std::string& output, std::optional<std::size_t> trials,
            std::optional<std::uint64_t> seed) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (!output.empty()) cfg.output_dir = output;
  if (trials) {
    if (*trials == 0) throw Error(ErrorCode::ConfigInvalid, "trials: must be >= 1");
    cfg.trials = *trials;
  }
  if (seed) cfg.seed = *seed;
  // Overrides change the run, so they are part of what gets hashed.
  Json effective = Json::parse(cfg.canonical_json);
  effective["trials"] = cfg.trials;
  effective["seed"] = cfg.seed;
  effective["output_dir"] = cfg.output_dir;
  cfg.canonical_json = effective.dump();

  const RunReport report = run_experiment(cfg);
  write_report(cfg, report);
  for (const MethodSummary& m : report.methods) {
    std::printf("%-16s final NMSE %s  (%zu trials)\n", m.name.c_str(), format_double(m.nmse.back()).c_str(),
                m.trial_nmse.size());
  }
  for (const TrialFailure& f : report.failures) {
    std::fprintf(stderr, "trial %zu (%s) failed: %s\n", f.trial, f.method.c_str(), f.message.c_str());
  }
  std::printf("wrote %s\n", cfg.output_dir.c_str());
  return 0;
}

int cmd_oracle(const std::string& config_path) {
  const ExperimentConfig cfg = load_experiment_config(config_path);
  const OracleCheck check = run_oracle_check(cfg);
  Json j{{"horizon", check.horizon}, {"chi_rel_error", check.chi_rel_error}, {"nu_rel_error", check.nu_rel_error}};
  std::cout << j.dump(2) << "\n";
  return check.chi_rel_error <= 1e-7 && check.nu_rel_error <= 1e-7 ? 0 : 1;
}

int cmd_gen(const std::string& config_path, const std::string& output) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (!cfg.scenario.synthetic) throw Error(ErrorCode::ConfigInvalid, "scenario.type: gen needs a synthetic scenario");
  const std::string dir = output.empty() ? cfg.output_dir : output;
  std::filesystem::create_directories(dir);
  const auto file = [&](const std::string& name) { return (std::filesystem::path(dir) / name).string(); };

  Rng graph_rng = make_rng(cfg.scenario.kronecker.rng_seed, 1);
  const GraphSequence graphs = kronecker_sequence(cfg.scenario.kronecker, cfg.horizon, graph_rng);
  Rng signal_rng = make_rng(cfg.scenario.signal.rng_seed, 2);
  const Scenario sc = gen_scenario(cfg.scenario.signal, graphs, cfg.horizon, signal_rng);

  write_signals_csv(file("signals.csv"), sc.signals);
  nlohmann::ordered_json manifest;
  manifest["num_nodes"] = graphs.num_nodes();
  manifest["horizon"] = cfg.horizon;
  manifest["signals"] = "signals.csv";
  manifest["epochs"] = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < graphs.snapshots().size(); ++e) {
    const std::string name = "graph_epoch_" + std::to_string(e) + ".csv";
    write_graph_csv(file(name), graphs.snapshots()[e].graph);
    manifest["epochs"].push_back({{"first_slot", graphs.snapshots()[e].first_slot}, {"path", name}});
  }
  if (!sc.nu.empty()) {
    const auto stack = [&](const std::vector<Vector>& rows) {
      Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(graphs.num_nodes()));
      for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
      return m;
    };
    write_signals_csv(file("nu.csv"), stack(sc.nu));
    write_signals_csv(file("chi.csv"), stack(sc.chi));
    manifest["components"] = {{"nu", "nu.csv"}, {"chi", "chi.csv"}};
  }
  write_text_file(file("manifest.json"), manifest.dump(2) + "\n");
  std::printf("wrote %zu slots, %zu epochs to %s\n", cfg.horizon, graphs.snapshots().size(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online reconstruction of time-varying graph signals"};
  app.require_subcommand(1);

  std::string config, output;
  std::optional<std::size_t> trials;
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run the Monte Carlo experiment described by a config");
  run->add_option("--config", config, "Experiment JSON")->required();
  run->add_option("--output", output, "Output directory (overrides output_dir)");
  run->add_option("--trials", trials, "Number of trials (overrides trials)");
  run->add_option("--seed", seed, "Base seed (overrides seed)");

  auto* oracle = app.add_subcommand("oracle", "Compare the filter with the batch solution on trial 0");
  oracle->add_option("--config", config, "Experiment JSON")->required();

  auto* gen = app.add_subcommand("gen", "Write the synthetic scenario as CSV files plus a manifest");
  gen->add_option("--config", config, "Experiment JSON")->required();
  gen->add_option("--output", output, "Output directory (overrides output_dir)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (run->parsed()) return cmd_run(config, output, trials, seed);
    if (oracle->parsed()) return cmd_oracle(config);
    if (gen->parsed()) return cmd_gen(config, output);
  } catch (const kkf::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
