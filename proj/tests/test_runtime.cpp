#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "helpers.hpp"
#include "seacgd/delay.hpp"
#include "seacgd/errors.hpp"
#include "seacgd/executor.hpp"
#include "seacgd/kernels.hpp"
#include "seacgd/partition.hpp"
#include "seacgd/server.hpp"

using namespace seacgd;

namespace {

RuntimeConfig quartic_config(const QuarticSaddle& f, std::vector<double> x0, std::size_t W, std::uint64_t tau) {
  RuntimeConfig cfg;
  cfg.objective = &f;
  cfg.x0 = std::move(x0);
  cfg.W = W;
  cfg.hp = derive_params(make_user_inputs(f, cfg.x0, W, tau));
  return cfg;
}

// Collects the materialized iterate after every apply.
struct IterateLog {
  std::vector<std::vector<double>> xs;
  void attach(Executor& ex) {
    Server* s = &ex.server();
    s->add_observer([this, s](const ApplyRecord&) { xs.push_back(s->materialize()); });
  }
};

// Running dense sum of every applied update.
struct UpdateSum {
  std::vector<double> total;
  void attach(Executor& ex) {
    Server* s = &ex.server();
    total.assign(s->storage().dimension(), 0.0);
    s->add_observer([this, s](const ApplyRecord& r) {
      const auto& b = s->partition()[r.block];
      std::vector<double> dense(b.size());
      s->storage().update_to_dense(r.block, r.update, dense);
      for (std::size_t i = 0; i < b.size(); ++i) total[b.begin + i] += dense[i];
    });
  }
};

}  // namespace

TEST_CASE("partition_blocks examples") {
  auto p = partition_blocks(4, 2);
  CHECK(p.blocks == std::vector<BlockRange>{{0, 2}, {2, 4}});
  p = partition_blocks(5, 2);
  CHECK(p.blocks == std::vector<BlockRange>{{0, 3}, {3, 5}});
  p = partition_blocks(3, 3);
  CHECK(p.blocks == std::vector<BlockRange>{{0, 1}, {1, 2}, {2, 3}});
  CHECK_THROWS_AS(partition_blocks(2, 3), ConfigError);
  CHECK_THROWS_AS(partition_blocks(2, 0), ConfigError);
}

TEST_CASE("partition covers the range with near-equal blocks") {
  for (std::size_t d : {1u, 7u, 64u, 1001u}) {
    for (std::size_t W = 1; W <= std::min<std::size_t>(d, 9); ++W) {
      const auto p = partition_blocks(d, W);
      REQUIRE(p.W() == W);
      std::size_t next = 0, lo = d, hi = 0;
      for (const auto& b : p.blocks) {
        CHECK(b.begin == next);
        CHECK_FALSE(b.empty());
        next = b.end;
        lo = std::min(lo, b.size());
        hi = std::max(hi, b.size());
      }
      CHECK(next == d);
      CHECK(hi - lo <= 1);
      for (std::size_t i = 0; i < d; ++i) CHECK(p[p.block_of(i)].contains(i));
    }
  }
}

TEST_CASE("sw_acgd_step examples") {
  testutil::HalfSquaredNorm q(2);
  std::vector<double> x{1.0, 2.0};
  auto u = sw_acgd_step(q, x, {0, 1}, 0.1);
  CHECK(u.to_dense() == std::vector<double>{-0.1, 0.0});

  QuarticSaddle f(6);
  for (BlockRange b : {BlockRange{0, 2}, BlockRange{2, 6}}) {
    u = sw_acgd_step(f, f.saddle_point(), b, 0.3);
    for (double v : u.to_dense()) CHECK(v == 0.0);
  }
  u = sw_acgd_step(q, x, {0, 2}, 0.0);
  for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("apply_update examples") {
  testutil::HalfSquaredNorm q(2);
  std::vector<double> x{1.0, 2.0};
  HamiltonianWindow w(1, q.eval(x));
  SparseBlockVector u{2, {0, 1}, {-0.1}};
  const double n = apply_update(x, u, w, q);
  CHECK(x == std::vector<double>{0.9, 2.0});
  CHECK(n == doctest::Approx(0.01));
  CHECK(w.current_j() == 1);
  CHECK(w.norms().back() == doctest::Approx(0.01));

  SparseBlockVector zero{2, {1, 2}, {0.0}};
  apply_update(x, zero, w, q);
  CHECK(x == std::vector<double>{0.9, 2.0});
  CHECK(w.current_j() == 2);
  CHECK(w.norms().back() == 0.0);

  std::vector<double> a{1.0, 2.0}, b{1.0, 2.0};
  HamiltonianWindow wa(2, 0.0), wb(2, 0.0);
  SparseBlockVector u1{2, {0, 1}, {0.3}}, u2{2, {1, 2}, {-0.7}};
  apply_update(a, u1, wa, q);
  apply_update(a, u2, wa, q);
  apply_update(b, u2, wb, q);
  apply_update(b, u1, wb, q);
  CHECK(a == b);
}

TEST_CASE("delay injector") {
  DelayModel m;
  CHECK_FALSE(DelayInjector(m, 4).next().has_value());

  m.kind = DelayKind::ExponentialOneWorker;
  m.expected_delay = 0.05;
  m.seed = 7;
  DelayInjector rr(m, 3);
  double sum = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const auto d = rr.next();
    REQUIRE(d.has_value());
    CHECK(d->worker == static_cast<std::uint64_t>(i % 3));
    sum += d->amount;
  }
  CHECK(sum / n == doctest::Approx(0.05).epsilon(0.01));

  m.victim_policy = VictimPolicy::FixedWorker;
  m.fixed_worker = 2;
  DelayInjector fixed(m, 4);
  for (int i = 0; i < 10; ++i) CHECK(fixed.next()->worker == 2);

  m.victim_policy = VictimPolicy::RandomEachIter;
  DelayInjector a(m, 4), b(m, 4);
  std::map<std::uint64_t, int> hits;
  for (int i = 0; i < 4000; ++i) {
    const auto x = a.next(), y = b.next();
    CHECK(x->worker == y->worker);
    CHECK(x->amount == y->amount);
    ++hits[x->worker];
  }
  CHECK(hits.size() == 4);
}

TEST_CASE("simulator with W=1 reproduces serial gradient descent") {
  QuarticSaddle f(10);
  auto cfg = quartic_config(f, f.point_at(1.2, -0.4), 1, 1);
  cfg.storage = StorageKind::Dense;
  auto ex = make_simulator(cfg);
  IterateLog log;
  log.attach(*ex);
  ex->advance(200);

  std::vector<double> x = cfg.x0;
  for (std::size_t k = 0; k < 200; ++k) {
    const auto g = f.gradient(x);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += -cfg.hp.eta * g[i];
    REQUIRE(log.xs[k] == x);
  }
}

TEST_CASE("W=2 with tau=1 and no delay alternates blocks with age at most 1") {
  QuarticSaddle f(10);
  auto cfg = quartic_config(f, f.point_at(1.2, -0.4), 2, 1);
  cfg.server.record_worker_events = true;
  auto ex = make_simulator(cfg);
  std::vector<std::uint64_t> blocks, ages;
  ex->server().add_observer([&](const ApplyRecord& r) {
    blocks.push_back(r.block);
    ages.push_back(r.max_age);
  });
  ex->advance(100);
  REQUIRE(blocks.size() == 100);
  for (std::size_t k = 0; k < 100; ++k) {
    CHECK(ages[k] <= 1);
    if (k > 0) CHECK(blocks[k] != blocks[k - 1]);
  }
  const auto trace = ex->take_trace();
  const auto audit = audit_event_log(trace.events, 2, 1);
  CHECK(audit.age_violations == 0);
  CHECK(audit.coverage_violations == 0);
  CHECK(audit.max_age_seen <= 1);
}

TEST_CASE("simulator runs are bit-identical") {
  QuarticSaddle f(100);
  auto cfg = quartic_config(f, f.point_at(1.1, -0.7), 4, 8);
  cfg.delay.kind = DelayKind::ExponentialOneWorker;
  cfg.delay.expected_delay = 0.1;
  cfg.delay.seed = 3;
  cfg.scheduler_seed = 5;
  cfg.server.trace_every = 7;
  cfg.server.record_worker_events = true;
  cfg.max_global_iters = 3000;
  const auto a = run_simulated(cfg);
  const auto b = run_simulated(cfg);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    CHECK(a.samples[i].time == b.samples[i].time);
    CHECK(a.samples[i].f == b.samples[i].f);
    CHECK(a.samples[i].E == b.samples[i].E);
  }
  REQUIRE(a.events.size() == b.events.size());
  for (std::size_t i = 0; i < a.events.size(); ++i) {
    CHECK(a.events[i].t == b.events[i].t);
    CHECK(a.events[i].worker == b.events[i].worker);
    CHECK(a.events[i].j == b.events[i].j);
  }
  CHECK(a.header == b.header);
}

TEST_CASE("heavy delays stall updates but never break the staleness bound") {
  QuarticSaddle f(40);
  for (std::size_t W : {2u, 4u, 8u}) {
    auto cfg = quartic_config(f, f.point_at(1.3, -0.2), W, W - 1);
    cfg.delay.kind = DelayKind::ExponentialOneWorker;
    cfg.delay.expected_delay = 3.0;
    cfg.delay.seed = W;
    cfg.server.record_worker_events = true;
    auto ex = make_simulator(cfg);
    std::uint64_t worst = 0;
    ex->server().add_observer([&](const ApplyRecord& r) { worst = std::max(worst, r.max_age); });
    CHECK_NOTHROW(ex->advance(2000));
    CHECK(worst <= W - 1);
    const auto& live = ex->server().audit();
    CHECK(live.age_violations == 0);
    CHECK(live.coverage_violations == 0);
    const auto trace = ex->take_trace();
    const auto post = audit_event_log(trace.events, W, W - 1);
    CHECK(post.age_violations == 0);
    CHECK(post.coverage_violations == 0);
    CHECK(post.applies == 2000);
  }
}

TEST_CASE("server rejects an update that breaks coverage in strict mode") {
  QuarticSaddle f(4);
  auto x0 = f.point_at(1.5, 0.0);
  const auto part = partition_blocks(4, 2);
  auto hp = derive_params(make_user_inputs(f, x0, 2, 1));
  std::vector<double> u;

  Server s(f, make_storage(f, part, x0, StorageKind::Dense), part, hp);
  auto s0 = s.fetch(0, 0.0);
  auto s1 = s.fetch(1, 0.0);
  s.compute_update(s1, u);
  CHECK(s.admissible(1));
  s.apply(s1, u, 0.0);
  // With tau = 1 block 0 must land within the next update.
  CHECK_FALSE(s.admissible(1));
  CHECK(s.admissible(0));
  s1 = s.fetch(1, 0.0);
  s.compute_update(s1, u);
  CHECK_THROWS_AS(s.apply(s1, u, 0.0), std::logic_error);

  ServerOptions lax;
  lax.strict_staleness = false;
  Server t(f, make_storage(f, part, x0, StorageKind::Dense), part, hp, lax);
  auto t0 = t.fetch(0, 0.0);
  for (int i = 0; i < 2; ++i) {
    auto t1 = t.fetch(1, 0.0);
    t.compute_update(t1, u);
    t.apply(t1, u, 0.0);
  }
  CHECK(t.audit().coverage_violations == 1);
  t.compute_update(t0, u);
  t.apply(t0, u, 0.0);
  CHECK(t.audit().age_violations == 1);
  CHECK(t.audit().max_age_seen == 2);
  (void)s0;
}

TEST_CASE("audit_event_log flags a hand-built violation") {
  std::vector<WorkerEvent> ev;
  auto push = [&](WorkerEventKind k, std::uint64_t w, std::uint64_t j) {
    WorkerEvent e;
    e.kind = k;
    e.worker = w;
    e.block = w;
    e.j = j;
    ev.push_back(e);
  };
  push(WorkerEventKind::Fetch, 0, 0);
  push(WorkerEventKind::Fetch, 1, 0);
  push(WorkerEventKind::ApplyUpdate, 1, 0);
  push(WorkerEventKind::Fetch, 1, 1);
  push(WorkerEventKind::ApplyUpdate, 1, 1);
  push(WorkerEventKind::ApplyUpdate, 0, 2);
  const auto a = audit_event_log(ev, 2, 1);
  CHECK(a.age_violations == 1);
  CHECK(a.max_age_seen == 2);
  CHECK(a.coverage_violations >= 1);
}

TEST_CASE("perturb restarts the window and bumps the epoch") {
  QuarticSaddle f(10);
  auto cfg = quartic_config(f, f.point_at(1.3, -0.2), 2, 1);
  auto ex = make_simulator(cfg);
  ex->advance(10);
  CHECK(ex->server().energy() != ex->server().value());
  std::vector<double> xi(10, 1e-3);
  const auto before = ex->server().materialize();
  ex->perturb(xi);
  CHECK(ex->server().epoch() == 1);
  CHECK(ex->server().energy() == ex->server().value());
  const auto after = ex->server().materialize();
  for (std::size_t i = 0; i < 10; ++i) CHECK(after[i] == doctest::Approx(before[i] + 1e-3));
  CHECK(ex->advance(10) == 10);
}

TEST_CASE("update conservation in both executors") {
  QuarticSaddle f(9);
  for (bool parallel : {false, true}) {
    for (StorageKind kind : {StorageKind::Dense, StorageKind::Factored}) {
      auto cfg = quartic_config(f, f.point_at(1.4, 0.0), 3, 6);
      cfg.storage = kind;
      cfg.delay.kind = DelayKind::ExponentialOneWorker;
      cfg.delay.expected_delay = 0.2;
      cfg.seconds_per_unit = 1e-5;
      auto ex = parallel ? make_parallel(cfg) : make_simulator(cfg);
      UpdateSum sum;
      sum.attach(*ex);
      ex->advance(3000);
      ex->shutdown();
      const auto x = ex->server().materialize();
      for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(x[i] - (cfg.x0[i] + sum.total[i])) <= 1e-10);
    }
  }
}

TEST_CASE("factored and dense storage follow the same trajectory") {
  QuarticSaddle f(40);
  auto cfg = quartic_config(f, f.point_at(1.35, -0.3), 4, 5);
  cfg.delay.kind = DelayKind::ExponentialOneWorker;
  cfg.delay.expected_delay = 0.3;
  cfg.storage = StorageKind::Dense;
  auto dense = make_simulator(cfg);
  cfg.storage = StorageKind::Factored;
  auto fact = make_simulator(cfg);
  CHECK(dense->server().storage().kind() == StorageKind::Dense);
  CHECK(fact->server().storage().kind() == StorageKind::Factored);
  dense->advance(5000);
  fact->advance(5000);
  const auto a = dense->server().materialize(), b = fact->server().materialize();
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-9).scale(1.0));
  CHECK(dense->server().value() == doctest::Approx(fact->server().value()).epsilon(1e-9).scale(1.0));
  CHECK(dense->now() == fact->now());
}

TEST_CASE("parallel executor with W=1 matches the simulator exactly") {
  QuarticSaddle f(10);
  auto cfg = quartic_config(f, f.point_at(1.2, -0.4), 1, 1);
  auto sim = make_simulator(cfg);
  auto par = make_parallel(cfg);
  IterateLog a, b;
  a.attach(*sim);
  b.attach(*par);
  sim->advance(500);
  par->advance(500);
  par->shutdown();
  REQUIRE(a.xs.size() == b.xs.size());
  for (std::size_t k = 0; k < a.xs.size(); ++k) REQUIRE(a.xs[k] == b.xs[k]);
  CHECK(par->take_trace().time_label == "wall");
}

TEST_CASE("parallel executor lands in the same basin as the simulator at d=1e6") {
  QuarticSaddle f(1000000);
  auto cfg = quartic_config(f, f.point_at(1.3, -0.6), 8, 7);
  const std::uint64_t n = 40000;
  auto sim = make_simulator(cfg);
  sim->advance(n);
  auto par = make_parallel(cfg);
  par->advance(n);
  par->shutdown();
  const double fs = sim->server().value(), fp = par->server().value();
  CHECK(fs == doctest::Approx(-250000.0).epsilon(1e-3));
  CHECK(fp == doctest::Approx(fs).epsilon(1e-3));
  CHECK(par->server().audit().age_violations == 0);
  CHECK(par->server().audit().coverage_violations == 0);
}

TEST_CASE("a delayed worker has the fewest updates in parallel mode") {
  QuarticSaddle f(1000);
  auto cfg = quartic_config(f, f.point_at(1.3, -0.6), 4, 8);
  cfg.delay.kind = DelayKind::ExponentialOneWorker;
  cfg.delay.expected_delay = 5e-2;
  cfg.delay.victim_policy = VictimPolicy::FixedWorker;
  cfg.delay.fixed_worker = 2;
  cfg.seconds_per_unit = 1e-3;
  auto par = make_parallel(cfg);
  std::vector<std::uint64_t> counts(4, 0);
  par->server().add_observer([&](const ApplyRecord& r) { ++counts[r.worker]; });
  par->advance(4000);
  par->shutdown();
  CHECK(counts[2] == *std::min_element(counts.begin(), counts.end()));
  CHECK(counts[2] < *std::max_element(counts.begin(), counts.end()));
}

TEST_CASE("sync executor pays the slowest worker every iteration") {
  QuarticSaddle f(8);
  auto cfg = quartic_config(f, f.point_at(1.3, -0.6), 4, 3);
  cfg.delay.kind = DelayKind::ExponentialOneWorker;
  cfg.delay.expected_delay = 5e-2;
  cfg.delay.seed = 17;
  SyncExecutor ex(cfg);
  DelayInjector oracle(cfg.delay, 4);
  std::vector<double> times;
  ex.server().add_observer([&](const ApplyRecord& r) { times.push_back(r.time); });
  ex.advance(500);
  double t = 0.0;
  for (std::size_t k = 0; k < 500; ++k) {
    const auto d = oracle.next();
    const double duration = 0.25 + d->amount;
    CHECK(duration >= d->amount);
    t += duration;
    CHECK(times[k] == doctest::Approx(t).epsilon(1e-12));
  }
  CHECK(ex.server().partition().W() == 1);
}

TEST_CASE("max_global_iters truncates the run") {
  QuarticSaddle f(10);
  auto cfg = quartic_config(f, f.point_at(1.2, -0.4), 2, 1);
  cfg.max_global_iters = 50;
  auto ex = make_simulator(cfg);
  CHECK(ex->advance(30) == 30);
  CHECK(ex->advance(30) == 20);
  CHECK(ex->truncated());
  CHECK(ex->advance(5) == 0);
  const auto tr = ex->take_trace();
  CHECK(tr.header["truncated"] == true);
}
