#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "seacgd/delay.hpp"
#include "seacgd/objective.hpp"
#include "seacgd/trace.hpp"

namespace seacgd {

enum class ExperimentKind { SaddleEvasion, DelaySweep, Scalability };
enum class AlgorithmKind { SEACGD, SerialGD, SyncParallelPGD };
enum class RunMode { Simulated, Parallel };

const char* to_string(ExperimentKind k);
const char* to_string(AlgorithmKind k);
const char* to_string(RunMode m);
ExperimentKind parse_experiment(const std::string& s);

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::SaddleEvasion;
  std::string objective = "paper_quartic";
  ObjectiveOptions objective_options;
  std::string x0 = "saddle";  // "saddle" (quartic only) or "zeros"
  std::vector<std::size_t> dims;
  std::vector<std::uint64_t> workers;
  std::optional<std::uint64_t> tau;  // unset: 2W for DelaySweep, max(W-1,1) otherwise
  std::vector<double> expected_delays;
  std::vector<std::uint64_t> seeds;
  std::vector<AlgorithmKind> algorithms;
  std::string output_dir = "bench_out";
  RunMode mode = RunMode::Simulated;
  double eps = 0.0;  // 0: default 0.25/rho
  double delta = 0.1;
  double mu = 1.0;
  VictimPolicy victim_policy = VictimPolicy::RoundRobin;
  std::uint64_t fixed_worker = 0;
  std::uint64_t trace_every = 1000;
  double target_tolerance_per_dim = 1e-3;
  std::uint64_t serial_gd_iters = 100000;
  bool record_events = true;
  std::size_t event_limit = 20000;
  bool allow_large_dims = false;
  double seconds_per_unit = 1e-4;
  int power_iters = 500;

  /// Per-experiment defaults for axes left empty.
  static ExperimentConfig defaults(ExperimentKind kind);
  /// Empty axes are filled from defaults(experiment); unknown keys are errors.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws ConfigError.
  void validate() const;
  std::uint64_t tau_for(std::uint64_t W) const;
};

struct CellSpec {
  AlgorithmKind algorithm = AlgorithmKind::SEACGD;
  std::size_t d = 0;
  std::uint64_t W = 1;
  std::uint64_t tau = 1;
  double expected_delay = 0.0;
  std::uint64_t seed = 0;

  std::string run_id() const;
};

/// Cross product of the axes. SerialGD ignores workers and delays and runs
/// once per (dim, seed) with W = 1.
std::vector<CellSpec> expand_cells(const ExperimentConfig& cfg);

/// Runs one cell, writes its trace CSV and event log, returns its summary row.
nlohmann::json run_cell(const ExperimentConfig& cfg, const CellSpec& cell);

struct ExperimentReport {
  nlohmann::json summary;
  int failures = 0;
  std::string summary_path;
};

/// Runs every cell (jobs > 1: that many child processes at a time), then
/// writes summary.json, summary.csv and plot data into output_dir.
ExperimentReport run_experiment(const ExperimentConfig& cfg, int jobs = 1);

/// Long-format CSV run_id,time,j,f,E. All traces must share a time label.
void emit_plot_data(const std::vector<std::pair<std::string, RunTrace>>& traces, const std::string& out);

/// Reads back a file written by RunTrace::write_csv.
RunTrace load_trace_csv(const std::string& path);

}  // namespace seacgd
