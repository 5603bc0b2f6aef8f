#pragma once

#include <condition_variable>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

#include "seacgd/delay.hpp"
#include "seacgd/server.hpp"

namespace seacgd {

struct RuntimeConfig {
  const Objective* objective = nullptr;
  HyperParams hp;
  std::vector<double> x0;
  std::size_t W = 1;
  DelayModel delay;
  /// Rotates the tie-break order among workers finishing at the same instant.
  std::uint64_t scheduler_seed = 0;
  std::uint64_t max_global_iters = 0;  // 0: unlimited
  StorageKind storage = StorageKind::Auto;
  ServerOptions server;
  double seconds_per_unit = 1e-4;  // parallel executor: wall seconds per virtual unit of injected delay
};

/// Drives a Server. Phase drivers only talk to this interface.
class Executor {
 public:
  virtual ~Executor() = default;
  Executor(const Executor&) = delete;
  Executor& operator=(const Executor&) = delete;

  /// Runs up to n more global iterations and returns how many were applied;
  /// fewer only once max_global_iters is exhausted.
  virtual std::uint64_t advance(std::uint64_t n) = 0;
  /// Adds xi to the iterate, restarts the Hamiltonian window and makes every
  /// worker drop its in-flight gradient and refetch.
  virtual void perturb(std::span<const double> xi) = 0;
  virtual double now() const = 0;
  /// Stops any background activity; the server is quiescent afterwards.
  virtual void shutdown() {}

  Server& server() { return *server_; }
  const Server& server() const { return *server_; }
  RunTrace& trace() { return server_->trace(); }
  bool truncated() const { return truncated_; }
  /// Shuts down, stamps the header (truncated, time_label, audit) and moves
  /// the trace out. The executor must not be advanced afterwards.
  RunTrace take_trace();
  std::uint64_t workers() const { return W_; }

 protected:
  Executor(const RuntimeConfig& cfg, const BlockPartition& server_partition);
  std::uint64_t clamp_budget(std::uint64_t n);

  std::unique_ptr<Server> server_;
  BlockPartition timing_partition_;  // the W worker blocks, used for compute times
  std::uint64_t W_;
  std::uint64_t max_iters_;
  bool truncated_ = false;
};

/// Deterministic discrete-event simulation on a virtual clock.
///
/// A worker's gradient takes |b|/d virtual units (a full gradient costs 1)
/// plus any injected delay. Finished updates that would make some block miss
/// its coverage deadline are held until admissible. Ties in completion time
/// go to the lower (worker + scheduler_seed) mod W.
class AsyncSimulator final : public Executor {
 public:
  explicit AsyncSimulator(const RuntimeConfig& cfg);

  std::uint64_t advance(std::uint64_t n) override;
  void perturb(std::span<const double> xi) override;
  double now() const override { return now_; }

 private:
  enum class Status { Computing, Holding };
  struct Worker {
    Status status = Status::Computing;
    DelayedSnapshot snap;
    std::vector<double> update;
    double done = 0.0;
    double injected = 0.0;  // delay charged to the current computation
    double pending = 0.0;   // delay charged to the next computation
    std::uint64_t priority = 0;
  };

  void start(std::uint64_t w, double extra_delay);
  void start_round();
  bool earlier(const Worker& a, const Worker& b) const;

  DelayInjector injector_;
  std::vector<Worker> workers_;
  double now_ = 0.0;
};

/// Real threads, one per worker, plus the calling thread as the server's
/// control loop. The server is guarded by a single mutex; updates are applied
/// in arrival order subject to the same admission rule as the simulator.
/// Injected delays are sleeps of amount * seconds_per_unit. Time is wall
/// seconds since construction.
class ParallelExecutor final : public Executor {
 public:
  explicit ParallelExecutor(const RuntimeConfig& cfg);
  ~ParallelExecutor() override;

  std::uint64_t advance(std::uint64_t n) override;
  void perturb(std::span<const double> xi) override;
  double now() const override;
  void shutdown() override;

 private:
  void worker_loop(std::uint64_t w);
  void start_round_locked();

  DelayInjector injector_;
  double seconds_per_unit_;
  std::chrono::steady_clock::time_point t0_;
  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::condition_variable done_cv_;
  std::uint64_t budget_ = 0;
  bool stop_ = false;
  std::exception_ptr error_;
  std::vector<double> pending_sleep_;
  std::vector<std::thread> threads_;
};

/// Barrier-synchronous execution: every iteration all W workers compute their
/// block gradient at the same iterate and the full step is applied as one
/// global iteration. The iteration lasts max_w(|b_w|/d + injected delay_w).
class SyncExecutor final : public Executor {
 public:
  explicit SyncExecutor(const RuntimeConfig& cfg);

  std::uint64_t advance(std::uint64_t n) override;
  void perturb(std::span<const double> xi) override;
  double now() const override { return now_; }

 private:
  DelayInjector injector_;
  std::vector<double> update_;
  double now_ = 0.0;
};

std::unique_ptr<Executor> make_simulator(const RuntimeConfig& cfg);
std::unique_ptr<Executor> make_parallel(const RuntimeConfig& cfg);

/// Builds a simulator, hands it to driver (or advances max_global_iters when
/// driver is empty) and returns its trace. header["truncated"] marks a run cut
/// short by max_global_iters.
RunTrace run_simulated(const RuntimeConfig& cfg, const std::function<void(Executor&)>& driver = {});
RunTrace run_parallel(const RuntimeConfig& cfg, const std::function<void(Executor&)>& driver = {});

}  // namespace seacgd
