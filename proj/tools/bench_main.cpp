// bench <experiment> --config <file> [overrides]
//
// Exit codes: 0 all cells succeeded, 1 a cell failed or output could not be
// written, 2 bad command line or configuration.
#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "seacgd/errors.hpp"
#include "seacgd/experiment.hpp"

int main(int argc, char** argv) {
  using namespace seacgd;

  CLI::App app{"Run the saddle-evasion, delay-sweep and scalability experiments."};
  std::string experiment;
  std::string config_path;
  std::vector<std::size_t> dims;
  std::vector<std::uint64_t> workers;
  std::vector<double> delays;
  std::vector<std::uint64_t> seeds;
  std::uint64_t tau = 0;
  std::string mode;
  std::string out;
  int jobs = 1;
  bool large = false;

  app.add_option("experiment", experiment, "SaddleEvasion, DelaySweep or Scalability")
      ->required()
      ->check(CLI::IsMember({"SaddleEvasion", "DelaySweep", "Scalability"}));
  app.add_option("--config", config_path, "JSON experiment config; omitted keys take per-experiment defaults");
  app.add_option("--dim", dims, "Override dims (repeatable)");
  app.add_option("--workers", workers, "Override worker counts (repeatable)");
  app.add_option("--tau", tau, "Fixed delay bound tau for every cell");
  app.add_option("--expected-delay", delays, "Override expected delays in virtual units (repeatable)");
  app.add_option("--seed", seeds, "Override seeds (repeatable)");
  app.add_option("--mode", mode, "Simulated or Parallel")->check(CLI::IsMember({"Simulated", "Parallel"}));
  app.add_option("--out", out, "Output directory");
  app.add_option("--jobs", jobs, "Cells run as this many concurrent processes")->check(CLI::PositiveNumber);
  app.add_flag("--large", large, "Allow dimensions above 1e6");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  ExperimentConfig cfg;
  try {
    nlohmann::json j = nlohmann::json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      j = nlohmann::json::parse(in);
    }
    if (j.contains("experiment") && j["experiment"] != experiment)
      throw ConfigError("config is for experiment " + j["experiment"].dump() + ", command line says " + experiment);
    j["experiment"] = experiment;
    cfg = ExperimentConfig::from_json(j);
    if (!dims.empty()) cfg.dims = dims;
    if (!workers.empty()) cfg.workers = workers;
    if (!delays.empty()) cfg.expected_delays = delays;
    if (!seeds.empty()) cfg.seeds = seeds;
    if (tau > 0) cfg.tau = tau;
    if (!mode.empty()) cfg.mode = mode == "Parallel" ? RunMode::Parallel : RunMode::Simulated;
    if (!out.empty()) cfg.output_dir = out;
    if (large) cfg.allow_large_dims = true;
    cfg.validate();
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  try {
    const ExperimentReport rep = run_experiment(cfg, jobs);
    for (const auto& row : rep.summary["cells"]) {
      std::cout << row["run_id"].get<std::string>();
      if (row.contains("error")) {
        std::cout << "  ERROR " << row["error"].get<std::string>() << '\n';
        continue;
      }
      std::cout << "  final_f=" << row["final_f"].dump() << "  time_to_target=" << row["time_to_target"].dump()
                << "  iters=" << row["total_iters"].dump() << "  escapes=" << row["escapes"].dump() << '\n';
    }
    std::cout << "summary: " << rep.summary_path << '\n';
    return rep.failures == 0 ? 0 : 1;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "run failure: " << e.what() << '\n';
    return 1;
  }
}
