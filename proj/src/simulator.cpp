#include <limits>
#include <stdexcept>

#include "seacgd/errors.hpp"
#include "seacgd/executor.hpp"

namespace seacgd {

Executor::Executor(const RuntimeConfig& cfg, const BlockPartition& server_partition)
    : timing_partition_(partition_blocks(cfg.objective ? cfg.objective->dimension() : 0, cfg.W)),
      W_(cfg.W),
      max_iters_(cfg.max_global_iters == 0 ? std::numeric_limits<std::uint64_t>::max() : cfg.max_global_iters) {
  if (!cfg.objective) throw ConfigError("runtime config has no objective");
  const Objective& f = *cfg.objective;
  auto storage = make_storage(f, server_partition, cfg.x0, cfg.storage);
  server_ = std::make_unique<Server>(f, std::move(storage), server_partition, cfg.hp, cfg.server);
}

std::uint64_t Executor::clamp_budget(std::uint64_t n) {
  const std::uint64_t used = server_->j();
  const std::uint64_t left = used >= max_iters_ ? 0 : max_iters_ - used;
  if (n > left) {
    truncated_ = true;
    return left;
  }
  return n;
}

RunTrace Executor::take_trace() {
  shutdown();
  RunTrace t = std::move(server_->trace());
  t.header["truncated"] = truncated_;
  t.header["time_label"] = t.time_label;
  t.header["audit"] = to_json(server_->audit());
  return t;
}

// ---------------------------------------------------------------------------

namespace {

std::size_t checked_dimension(const RuntimeConfig& cfg) {
  if (!cfg.objective) throw ConfigError("runtime config has no objective");
  return cfg.objective->dimension();
}

}  // namespace

AsyncSimulator::AsyncSimulator(const RuntimeConfig& cfg)
    : Executor(cfg, partition_blocks(checked_dimension(cfg), cfg.W)), injector_(cfg.delay, cfg.W) {
  workers_.resize(W_);
  for (std::uint64_t w = 0; w < W_; ++w) {
    workers_[w].priority = (w + cfg.scheduler_seed) % W_;
    start(w, 0.0);
  }
  start_round();
}

void AsyncSimulator::start(std::uint64_t w, double extra_delay) {
  Worker& k = workers_[w];
  k.snap = server_->fetch(w, now_);
  const double compute = static_cast<double>(timing_partition_[w].size()) /
                         static_cast<double>(timing_partition_.d);
  k.injected = extra_delay + k.pending;
  k.pending = 0.0;
  k.done = now_ + compute + k.injected;
  k.status = Status::Computing;
}

void AsyncSimulator::start_round() {
  auto d = injector_.next();
  if (!d) return;
  Worker& v = workers_[d->worker];
  if (v.status == Status::Computing) {
    v.done += d->amount;
    v.injected += d->amount;
  } else {
    v.pending += d->amount;
  }
}

bool AsyncSimulator::earlier(const Worker& a, const Worker& b) const {
  if (a.done != b.done) return a.done < b.done;
  return a.priority < b.priority;
}

std::uint64_t AsyncSimulator::advance(std::uint64_t n) {
  n = clamp_budget(n);
  std::uint64_t applied = 0;
  while (applied < n) {
    std::int64_t pick = -1;
    for (std::uint64_t w = 0; w < W_; ++w) {
      const Worker& k = workers_[w];
      if (k.status != Status::Holding || !server_->admissible(w)) continue;
      if (pick < 0 || earlier(k, workers_[pick])) pick = static_cast<std::int64_t>(w);
    }
    if (pick >= 0) {
      Worker& k = workers_[pick];
      server_->apply(k.snap, k.update, now_);
      ++applied;
      start(static_cast<std::uint64_t>(pick), 0.0);
      if (server_->j() % W_ == 0) start_round();
      continue;
    }
    std::int64_t next = -1;
    for (std::uint64_t w = 0; w < W_; ++w) {
      if (workers_[w].status != Status::Computing) continue;
      if (next < 0 || earlier(workers_[w], workers_[next])) next = static_cast<std::int64_t>(w);
    }
    if (next < 0) throw std::logic_error("simulator stalled: every worker holds an inadmissible update");
    Worker& k = workers_[next];
    now_ = std::max(now_, k.done);
    server_->compute_update(k.snap, k.update);
    k.status = Status::Holding;
    server_->note_gradient_done(static_cast<std::uint64_t>(next), now_);
  }
  return applied;
}

void AsyncSimulator::perturb(std::span<const double> xi) {
  server_->perturb(xi, now_);
  for (std::uint64_t w = 0; w < W_; ++w) {
    Worker& k = workers_[w];
    // A computation cut short keeps its injected delay; a finished one has
    // already served it.
    const double carry = k.status == Status::Computing ? k.injected : 0.0;
    start(w, carry);
  }
}

std::unique_ptr<Executor> make_simulator(const RuntimeConfig& cfg) { return std::make_unique<AsyncSimulator>(cfg); }

namespace {

RunTrace run_with(std::unique_ptr<Executor> ex, const RuntimeConfig& cfg,
                  const std::function<void(Executor&)>& driver) {
  if (driver) {
    driver(*ex);
  } else {
    if (cfg.max_global_iters == 0) throw ConfigError("run without a driver needs max_global_iters");
    ex->advance(cfg.max_global_iters);
  }
  ex->shutdown();
  ex->server().sample(ex->now());
  return ex->take_trace();
}

}  // namespace

RunTrace run_simulated(const RuntimeConfig& cfg, const std::function<void(Executor&)>& driver) {
  return run_with(make_simulator(cfg), cfg, driver);
}

RunTrace run_parallel(const RuntimeConfig& cfg, const std::function<void(Executor&)>& driver) {
  return run_with(make_parallel(cfg), cfg, driver);
}

}  // namespace seacgd
