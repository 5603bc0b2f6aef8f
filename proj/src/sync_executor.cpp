#include <algorithm>

#include "seacgd/errors.hpp"
#include "seacgd/executor.hpp"

namespace seacgd {

namespace {

BlockPartition whole(const RuntimeConfig& cfg) {
  if (!cfg.objective) throw ConfigError("runtime config has no objective");
  return partition_blocks(cfg.objective->dimension(), 1);
}

}  // namespace

// The server sees a single block covering [0, d): the combined step of the W
// workers is exactly the full-gradient step, and W only shapes the clock.
SyncExecutor::SyncExecutor(const RuntimeConfig& cfg) : Executor(cfg, whole(cfg)), injector_(cfg.delay, cfg.W) {}

std::uint64_t SyncExecutor::advance(std::uint64_t n) {
  n = clamp_budget(n);
  const double d = static_cast<double>(timing_partition_.d);
  for (std::uint64_t i = 0; i < n; ++i) {
    const auto delay = injector_.next();
    double duration = 0.0;
    for (std::uint64_t w = 0; w < W_; ++w) {
      double t = static_cast<double>(timing_partition_[w].size()) / d;
      if (delay && delay->worker == w) t += delay->amount;
      duration = std::max(duration, t);
    }
    DelayedSnapshot snap = server_->fetch(0, now_);
    server_->compute_update(snap, update_);
    now_ += duration;
    server_->note_gradient_done(0, now_);
    server_->apply(snap, update_, now_);
  }
  return n;
}

void SyncExecutor::perturb(std::span<const double> xi) { server_->perturb(xi, now_); }

}  // namespace seacgd
