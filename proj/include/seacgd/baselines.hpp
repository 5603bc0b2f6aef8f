#pragma once

#include <cstdint>
#include <span>

#include "seacgd/algorithms.hpp"
#include "seacgd/delay.hpp"

namespace seacgd {

enum class BaselineKind { SerialGD, SerialPGD, SyncParallelPGD };
const char* to_string(BaselineKind k);

/// Perturbed variants mirror SE-ACGD's decision rule: windows of window_tau+1
/// full-gradient steps, perturb when the Hamiltonian drop is below
/// `threshold`, run perturb_interval_T steps, stop when that drop is also
/// below `threshold`.
struct BaselineConfig {
  BaselineKind kind = BaselineKind::SerialGD;
  double eta = 0.0;
  double perturb_radius = 0.0;
  std::uint64_t perturb_interval_T = 1;
  double threshold = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t window_tau = 1;
  double lipschitz_L = 1.0;
  double eps = 0.0;  // certificate accuracy; 0 skips certification
  int power_iters = 500;

  /// eta, eta*r, T, F, tau and L from hp.
  static BaselineConfig from(const HyperParams& hp, BaselineKind kind, std::uint64_t seed);
};

struct BaselineRun {
  TerminationReport report;  // outcome/certificate only meaningful for PGD kinds
  RunTrace trace;
};

/// x <- x - eta grad f(x) for max_iters steps.
RunTrace run_serial_gd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                       std::uint64_t max_iters, ServerOptions server = {});

BaselineRun run_serial_pgd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                           std::uint64_t max_iters, ServerOptions server = {});

BaselineRun run_sync_parallel_pgd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                                  std::uint64_t W, const DelayModel& delay, std::uint64_t max_iters,
                                  ServerOptions server = {});

}  // namespace seacgd
