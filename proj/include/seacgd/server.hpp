#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "seacgd/hamiltonian.hpp"
#include "seacgd/hyperparams.hpp"
#include "seacgd/objective.hpp"
#include "seacgd/partition.hpp"
#include "seacgd/storage.hpp"
#include "seacgd/trace.hpp"

namespace seacgd {

/// One worker's stale view of the iterate: the storage snapshot plus the
/// per-block update counters at fetch time, from which block ages follow.
struct DelayedSnapshot {
  std::uint64_t worker = 0;
  std::vector<double> values;
  std::vector<std::uint64_t> fetch_counts;
  std::uint64_t taken_at_j = 0;
  std::uint64_t epoch = 0;
  double time = 0.0;

  /// D_worker(p) for every block p given the server's current counters.
  std::vector<std::uint64_t> block_ages(std::span<const std::uint64_t> current_counts) const;
};

class Server;

struct ApplyRecord {
  std::uint64_t j = 0;  // index of this update; the iterate becomes x^{j+1}
  std::uint64_t worker = 0;
  std::uint64_t block = 0;
  double step_sq = 0.0;
  double f = 0.0;  // f(x^{j+1})
  double E_prev = 0.0;
  double E_next = 0.0;
  std::uint64_t max_age = 0;
  double time = 0.0;
  std::span<const double> update;  // storage encoding, valid during the callback only
  DescentReport descent;
  const Server* server = nullptr;  // the applying server, already holding x^{j+1}
};

using ApplyObserver = std::function<void(const ApplyRecord&)>;

/// Running tallies of the bounded-delay and descent contracts.
struct AuditStats {
  std::uint64_t applies = 0;
  std::uint64_t max_age_seen = 0;
  std::uint64_t age_violations = 0;
  std::uint64_t coverage_violations = 0;
  std::uint64_t corollary_violations = 0;
  std::uint64_t lemma_violations = 0;
  double min_corollary_slack = 0.0;
  double min_lemma_slack = 0.0;
  std::uint64_t fstar_violations = 0;
};

nlohmann::json to_json(const AuditStats& a);

struct ServerOptions {
  std::uint64_t trace_every = 0;  // 0 disables periodic samples
  bool record_worker_events = false;
  std::size_t worker_event_limit = 200000;
  std::optional<double> target_f;
  double descent_tol = 1e-9;
  /// Throw on an age or coverage violation instead of only counting it.
  bool strict_staleness = true;
  /// Attached at construction, for runs whose executor is built internally.
  std::vector<ApplyObserver> observers;
};

/// The parameter server: sole owner of the iterate, j, the per-block update
/// counters and the Hamiltonian window. Not thread-safe; executors serialize
/// access.
class Server {
 public:
  Server(const Objective& f, std::unique_ptr<IterateStorage> storage, BlockPartition partition, HyperParams hp,
         ServerOptions options = {});

  DelayedSnapshot fetch(std::uint64_t worker, double time);
  /// sw_acgd_step in the storage encoding: -eta * grad_b f(snapshot).
  void compute_update(const DelayedSnapshot& snap, std::vector<double>& update) const;
  /// True when applying the worker's update now keeps every block's coverage
  /// deadline satisfiable (earliest-deadline-first check).
  bool admissible(std::uint64_t worker) const;
  ApplyRecord apply(const DelayedSnapshot& snap, std::span<const double> update, double time);
  /// x += xi; the Hamiltonian window restarts from zero history; epoch advances.
  void perturb(std::span<const double> xi, double time);
  void note_gradient_done(std::uint64_t worker, double time);

  void set_phase(Phase p) { phase_ = p; }
  Phase phase() const { return phase_; }
  void add_observer(ApplyObserver obs) { observers_.push_back(std::move(obs)); }
  void sample(double time);

  double energy() const { return window_.energy(hp_.L); }
  double value() const { return storage_->value(); }
  double grad_norm() const { return storage_->grad_norm(); }
  std::vector<double> materialize() const { return storage_->materialize(); }
  std::uint64_t j() const { return j_; }
  std::uint64_t epoch() const { return epoch_; }
  std::uint64_t W() const { return partition_.W(); }
  const BlockPartition& partition() const { return partition_; }
  const HyperParams& hp() const { return hp_; }
  const HamiltonianWindow& window() const { return window_; }
  const std::vector<std::uint64_t>& update_counts() const { return counts_; }
  const AuditStats& audit() const { return audit_; }
  const IterateStorage& storage() const { return *storage_; }
  const Objective& objective() const { return f_; }
  RunTrace& trace() { return trace_; }
  const RunTrace& trace() const { return trace_; }

 private:
  void record_event(WorkerEventKind kind, std::uint64_t worker, double time, double step_sq);

  const Objective& f_;
  std::unique_ptr<IterateStorage> storage_;
  BlockPartition partition_;
  HyperParams hp_;
  ServerOptions opt_;
  HamiltonianWindow window_;
  std::uint64_t j_ = 0;
  std::uint64_t epoch_ = 0;
  std::vector<std::uint64_t> counts_;
  std::vector<std::int64_t> last_;  // index of the last update per block, -1 before any
  std::vector<bool> recording_;     // per worker: current cycle is being logged
  Phase phase_ = Phase::LG;
  std::vector<ApplyObserver> observers_;
  AuditStats audit_;
  RunTrace trace_;
  mutable std::vector<std::int64_t> scratch_;
};

/// Re-derives the staleness tallies from a recorded event log (ages from
/// Fetch/ApplyUpdate pairs, coverage from the apply order). A worker that
/// fetches twice without applying restarted after a perturbation; its later
/// fetch counts.
AuditStats audit_event_log(std::span<const WorkerEvent> events, std::uint64_t W, std::uint64_t tau);

/// Single-worker step on a dense snapshot: u_b = -eta grad_b f(x), zero elsewhere.
SparseBlockVector sw_acgd_step(const Objective& f, std::span<const double> snapshot, BlockRange block, double eta);

/// Dense reference of the server's apply: x_b += u_b, pushes ||u||^2 and f(x)
/// into the window. Returns ||u||^2.
double apply_update(std::vector<double>& x, const SparseBlockVector& u, HamiltonianWindow& window,
                    const Objective& f);

}  // namespace seacgd
