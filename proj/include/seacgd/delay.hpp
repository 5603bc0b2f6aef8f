#pragma once

#include <cstdint>
#include <optional>
#include <random>

namespace seacgd {

enum class DelayKind { None, ExponentialOneWorker };
enum class VictimPolicy { RoundRobin, FixedWorker, RandomEachIter };

struct DelayModel {
  DelayKind kind = DelayKind::None;
  double expected_delay = 0.0;  // virtual time units (seconds_per_unit scales it in wall mode)
  VictimPolicy victim_policy = VictimPolicy::RoundRobin;
  std::uint64_t fixed_worker = 0;
  std::uint64_t seed = 0;

  bool active() const { return kind == DelayKind::ExponentialOneWorker && expected_delay > 0.0; }
};

struct InjectedDelay {
  std::uint64_t worker = 0;
  double amount = 0.0;
};

/// One Exp(1/expected_delay) draw per round, charged to a single worker.
///
/// A round is one synchronous iteration, which is W asynchronous global
/// iterations; executors call next() when a round starts. Deterministic for
/// a given seed.
class DelayInjector {
 public:
  DelayInjector(DelayModel model, std::uint64_t W);

  std::optional<InjectedDelay> next();
  std::uint64_t rounds() const { return round_; }

 private:
  DelayModel model_;
  std::uint64_t W_;
  std::uint64_t round_ = 0;
  std::mt19937_64 rng_;
};

}  // namespace seacgd
