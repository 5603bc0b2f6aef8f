#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace seacgd {

enum class Phase { LG, PERTURB, DONE };
enum class WorkerEventKind { Fetch, GradientDone, ApplyUpdate };

const char* to_string(Phase p);
const char* to_string(WorkerEventKind k);

struct TraceSample {
  double time = 0.0;
  std::uint64_t j = 0;
  double f = 0.0;
  double E = 0.0;
  double grad_norm = 0.0;
  Phase phase = Phase::LG;
};

struct PhaseEvent {
  Phase phase = Phase::LG;
  std::uint64_t j_begin = 0;
  std::uint64_t j_end = 0;
  double time = 0.0;
  double entry_E = 0.0;
  double exit_E = 0.0;
  double threshold_F = 0.0;
  std::string decision;
};

struct WorkerEvent {
  double t = 0.0;
  std::uint64_t worker = 0;
  WorkerEventKind kind = WorkerEventKind::Fetch;
  std::uint64_t j = 0;
  std::uint64_t block = 0;
  double step_sq_norm = 0.0;
  double f = 0.0;
  double E = 0.0;
};

/// Time-stamped record of one run. `time_label` is "virtual" or "wall".
struct RunTrace {
  std::string algorithm;
  std::string time_label = "virtual";
  nlohmann::json header = nlohmann::json::object();
  std::vector<TraceSample> samples;
  std::vector<PhaseEvent> phases;
  std::vector<WorkerEvent> events;
  bool events_truncated = false;
  std::optional<double> time_to_target;
  std::optional<std::uint64_t> iters_to_target;

  /// Columns: <label>_time, j, f, E, grad_norm, phase.
  void write_csv(const std::string& path) const;
  /// One JSON object per line: worker events, then phase events (kind "Phase").
  void write_events_jsonl(const std::string& path) const;
};

/// Number formatting shared by every CSV writer: shortest round-trip form.
std::string format_double(double v);

}  // namespace seacgd
