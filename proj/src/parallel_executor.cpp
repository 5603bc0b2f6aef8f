#include <chrono>
#include <stdexcept>

#include "seacgd/errors.hpp"
#include "seacgd/executor.hpp"

namespace seacgd {

ParallelExecutor::ParallelExecutor(const RuntimeConfig& cfg)
    : Executor(cfg, partition_blocks(cfg.objective ? cfg.objective->dimension() : 0, cfg.W)),
      injector_(cfg.delay, cfg.W),
      seconds_per_unit_(cfg.seconds_per_unit),
      t0_(std::chrono::steady_clock::now()) {
  server_->trace().time_label = "wall";
  pending_sleep_.assign(W_, 0.0);
  {
    std::lock_guard lock(mu_);
    start_round_locked();
  }
  threads_.reserve(W_);
  for (std::uint64_t w = 0; w < W_; ++w) threads_.emplace_back([this, w] { worker_loop(w); });
}

ParallelExecutor::~ParallelExecutor() { shutdown(); }

void ParallelExecutor::shutdown() {
  {
    std::lock_guard lock(mu_);
    stop_ = true;
  }
  cv_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
}

double ParallelExecutor::now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
}

void ParallelExecutor::start_round_locked() {
  if (auto d = injector_.next()) pending_sleep_[d->worker] += d->amount;
}

void ParallelExecutor::worker_loop(std::uint64_t w) {
  try {
    std::unique_lock lock(mu_);
    DelayedSnapshot snap = server_->fetch(w, now());
    std::vector<double> update;
    while (!stop_) {
      lock.unlock();
      server_->compute_update(snap, update);
      lock.lock();
      const double sleep_units = pending_sleep_[w];
      pending_sleep_[w] = 0.0;
      if (sleep_units > 0.0) {
        lock.unlock();
        std::this_thread::sleep_for(std::chrono::duration<double>(sleep_units * seconds_per_unit_));
        lock.lock();
      }
      server_->note_gradient_done(w, now());
      cv_.wait(lock, [&] {
        return stop_ || snap.epoch != server_->epoch() || (budget_ > 0 && server_->admissible(w));
      });
      if (stop_) break;
      if (snap.epoch == server_->epoch()) {
        server_->apply(snap, update, now());
        --budget_;
        if (server_->j() % W_ == 0) start_round_locked();
        if (budget_ == 0) done_cv_.notify_all();
        cv_.notify_all();
      }
      snap = server_->fetch(w, now());
    }
  } catch (...) {
    std::lock_guard lock(mu_);
    if (!error_) error_ = std::current_exception();
    stop_ = true;
    cv_.notify_all();
    done_cv_.notify_all();
  }
}

std::uint64_t ParallelExecutor::advance(std::uint64_t n) {
  std::unique_lock lock(mu_);
  n = clamp_budget(n);
  if (error_) std::rethrow_exception(error_);
  const std::uint64_t target = server_->j() + n;
  budget_ = n;
  cv_.notify_all();
  done_cv_.wait(lock, [&] { return server_->j() >= target || error_ || stop_; });
  budget_ = 0;
  if (error_) std::rethrow_exception(error_);
  return n - (target - server_->j());
}

void ParallelExecutor::perturb(std::span<const double> xi) {
  {
    std::lock_guard lock(mu_);
    server_->perturb(xi, now());
  }
  cv_.notify_all();
}

std::unique_ptr<Executor> make_parallel(const RuntimeConfig& cfg) { return std::make_unique<ParallelExecutor>(cfg); }

}  // namespace seacgd
