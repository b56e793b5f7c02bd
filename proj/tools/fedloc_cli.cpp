#include <CLI11.hpp>

#include <iostream>

#include "fedloc/error.hpp"
#include "fedloc/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Federated visual positioning simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;

  auto* run = app.add_subcommand("run", "Run one scenario and write cycles.csv and summary.json");
  run->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--seed", seed, "Override the scenario seed");

  std::string kind;
  int trials = 0;
  int max_obs = 10;
  auto* exp = app.add_subcommand("experiment", "Run a batch experiment");
  exp->add_option("kind", kind, "stitch | selector | recognizer")
      ->required()
      ->check(CLI::IsMember({"stitch", "selector", "recognizer"}));
  exp->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  exp->add_option("--trials", trials, "Trials (queries for recognizer); default per experiment");
  exp->add_option("--max-obs", max_obs, "Largest observation count (stitch)");
  exp->add_option("--out", out_dir, "Output directory");
  exp->add_option("--seed", seed, "Override the scenario seed");

  auto* show = app.add_subcommand("show-config", "Print the parsed config with defaults filled in");
  show->add_option("--config", config_path, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    fedloc::ScenarioConfig cfg = fedloc::load_config(config_path);
    if (seed) cfg.seed = *seed;

    if (*show) {
      std::cout << fedloc::config_to_json(cfg).dump(2) << "\n";
    } else if (*run) {
      const auto report = fedloc::run_scenario(cfg);
      fedloc::write_run(report, out_dir);
      std::cout << report.summary_json();
    } else {
      fedloc::ExperimentResult result;
      if (kind == "stitch") {
        result = fedloc::experiment_stitch_convergence(cfg, trials > 0 ? trials : 1000, max_obs);
      } else if (kind == "selector") {
        result = fedloc::experiment_selector(cfg, trials > 0 ? trials : 100);
      } else {
        result = fedloc::experiment_recognizer(cfg, trials > 0 ? trials : 1000);
      }
      fedloc::write_experiment(result, out_dir);
      std::cout << result.table.csv();
    }
  } catch (const fedloc::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
