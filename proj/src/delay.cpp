#include "seacgd/delay.hpp"

#include "seacgd/errors.hpp"

namespace seacgd {

DelayInjector::DelayInjector(DelayModel model, std::uint64_t W) : model_(model), W_(W) {
  if (W == 0) throw ConfigError("delay injector needs W >= 1");
  if (model.expected_delay < 0.0) throw ConfigError("expected_delay must be non-negative");
  if (model.victim_policy == VictimPolicy::FixedWorker && model.fixed_worker >= W)
    throw ConfigError("fixed delay victim outside [0, W)");
  std::seed_seq seq{static_cast<std::uint32_t>(model.seed), static_cast<std::uint32_t>(model.seed >> 32),
                    0x64656c61u};
  rng_.seed(seq);
}

std::optional<InjectedDelay> DelayInjector::next() {
  const std::uint64_t round = round_++;
  if (!model_.active()) return std::nullopt;
  InjectedDelay d;
  switch (model_.victim_policy) {
    case VictimPolicy::RoundRobin: d.worker = round % W_; break;
    case VictimPolicy::FixedWorker: d.worker = model_.fixed_worker; break;
    case VictimPolicy::RandomEachIter: d.worker = std::uniform_int_distribution<std::uint64_t>(0, W_ - 1)(rng_); break;
  }
  d.amount = std::exponential_distribution<double>(1.0 / model_.expected_delay)(rng_);
  return d;
}

}  // namespace seacgd
