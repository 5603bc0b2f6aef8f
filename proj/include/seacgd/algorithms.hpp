#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seacgd/executor.hpp"
#include "seacgd/hyperparams.hpp"
#include "seacgd/objective.hpp"

namespace seacgd {

struct PhaseResult {
  std::vector<double> final_iterate;
  double entry_energy = 0.0;
  double final_energy = 0.0;
  double energy_drop = 0.0;  // entry_energy - final_energy
  std::uint64_t global_iters_used = 0;
  Phase phase = Phase::LG;
  bool truncated = false;
};

enum class Outcome { SecondOrderStationary, IterationCapReached };
const char* to_string(Outcome o);

struct TerminationReport {
  Outcome outcome = Outcome::IterationCapReached;
  PointClass certificate;
  std::uint64_t total_global_iters = 0;
  std::uint64_t total_perturbations = 0;
  std::uint64_t escapes = 0;
  std::uint64_t lg_phases = 0;
  std::uint64_t perturb_phases = 0;
  /// x^s on SecondOrderStationary, the current iterate at the cap otherwise.
  std::vector<double> final_iterate;
  double final_f = 0.0;
};

/// Everything the phase loop needs. SE-ACGD and the PGD baselines share it.
struct PhasePlan {
  std::uint64_t lg_iters = 1;  // tau + 1
  std::uint64_t T = 1;
  double F = 0.0;
  double radius = 0.0;  // perturbation ball radius
  std::uint64_t cap = 0;
  std::uint64_t seed = 0;
  double eps = 0.0;
  int power_iters = 500;
  bool certify = true;

  static PhasePlan from(const HyperParams& hp, std::uint64_t seed);
};

struct SeAcgdOptions {
  std::uint64_t seed = 0;
  int power_iters = 500;
  bool certify = true;
  std::optional<std::uint64_t> cap = std::nullopt;  // overrides hp.t_max
};

/// tau+1 global iterations; drop measured from the phase's entry energy.
PhaseResult lg_acgd(Executor& ex, const HyperParams& hp);

struct PerturbOptions {
  std::optional<double> radius;  // default eta * r; 0 forces xi = 0
};

/// xi uniform in the ball of radius eta*r, y0 = x + xi, window restarted at
/// y0, T global iterations; drop = E(x) - E_T.
PhaseResult p_acgd(Executor& ex, const HyperParams& hp, std::uint64_t rng_seed, PerturbOptions opts = {});

/// Outer loop: LG phases until one drops less than F, then a perturbation
/// phase; a perturbation phase that also drops less than F stops the run and
/// returns the pre-perturbation iterate. Capped at hp.t_max iterations.
TerminationReport se_acgd(Executor& ex, const HyperParams& hp, const SeAcgdOptions& opts = {});

/// The shared phase loop behind se_acgd and the PGD baselines.
TerminationReport run_phases(Executor& ex, const PhasePlan& plan);

struct AlgorithmRun {
  TerminationReport report;
  RunTrace trace;
};

/// Builds the executor (simulated or parallel), runs se_acgd, returns both.
AlgorithmRun run_se_acgd(const RuntimeConfig& cfg, const SeAcgdOptions& opts, bool parallel = false);

/// Uniform point in the d-ball: isotropic Gaussian direction, length radius * U^(1/d).
std::vector<double> uniform_ball_sample(std::span<const double> center, double radius, std::uint64_t seed);
/// Seed of the index-th perturbation of a run.
std::uint64_t perturbation_seed(std::uint64_t run_seed, std::uint64_t index);

}  // namespace seacgd
