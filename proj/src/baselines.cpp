#include "seacgd/baselines.hpp"

#include "seacgd/errors.hpp"

namespace seacgd {

const char* to_string(BaselineKind k) {
  switch (k) {
    case BaselineKind::SerialGD: return "SerialGD";
    case BaselineKind::SerialPGD: return "SerialPGD";
    case BaselineKind::SyncParallelPGD: return "SyncParallelPGD";
  }
  return "?";
}

BaselineConfig BaselineConfig::from(const HyperParams& hp, BaselineKind kind, std::uint64_t seed) {
  BaselineConfig c;
  c.kind = kind;
  c.eta = hp.eta;
  c.perturb_radius = hp.perturb_radius();
  c.perturb_interval_T = hp.T;
  c.threshold = hp.F_threshold;
  c.seed = seed;
  c.window_tau = hp.tau;
  c.lipschitz_L = hp.L;
  c.eps = hp.eps;
  return c;
}

namespace {

RuntimeConfig runtime_for(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                          std::uint64_t W, const DelayModel& delay, std::uint64_t max_iters,
                          const ServerOptions& server) {
  if (!(cfg.eta >= 0.0)) throw ConfigError("baseline step size must be non-negative");
  RuntimeConfig rc;
  rc.objective = &f;
  rc.hp.eta = cfg.eta;
  rc.hp.tau = std::max<std::uint64_t>(cfg.window_tau, 1);
  rc.hp.L = cfg.lipschitz_L;
  rc.hp.W = W;
  rc.hp.d = f.dimension();
  rc.hp.eps = cfg.eps;
  rc.hp.T = cfg.perturb_interval_T;
  rc.hp.F_threshold = cfg.threshold;
  rc.x0.assign(x0.begin(), x0.end());
  rc.W = W;
  rc.delay = delay;
  rc.max_global_iters = max_iters;
  rc.server = server;
  return rc;
}

BaselineRun run_pgd(const RuntimeConfig& rc, const BaselineConfig& cfg) {
  SyncExecutor ex(rc);
  ex.trace().algorithm = to_string(cfg.kind);
  ex.trace().header["baseline"] = {{"eta", cfg.eta},
                                   {"perturb_radius", cfg.perturb_radius},
                                   {"perturb_interval_T", cfg.perturb_interval_T},
                                   {"threshold", cfg.threshold},
                                   {"seed", cfg.seed},
                                   {"window_tau", cfg.window_tau}};
  PhasePlan plan;
  plan.lg_iters = rc.hp.tau + 1;
  plan.T = cfg.perturb_interval_T;
  plan.F = cfg.threshold;
  plan.radius = cfg.perturb_radius;
  plan.cap = rc.max_global_iters == 0 ? ~std::uint64_t{0} : rc.max_global_iters;
  plan.seed = cfg.seed;
  plan.eps = cfg.eps;
  plan.power_iters = cfg.power_iters;
  plan.certify = cfg.eps > 0.0;
  BaselineRun run;
  run.report = run_phases(ex, plan);
  run.trace = ex.take_trace();
  run.trace.header["outcome"] = to_string(run.report.outcome);
  return run;
}

}  // namespace

RunTrace run_serial_gd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                       std::uint64_t max_iters, ServerOptions server) {
  RuntimeConfig rc = runtime_for(x0, f, cfg, 1, DelayModel{}, max_iters, server);
  SyncExecutor ex(rc);
  ex.trace().algorithm = to_string(BaselineKind::SerialGD);
  ex.server().set_phase(Phase::LG);
  ex.advance(max_iters);
  ex.server().set_phase(Phase::DONE);
  ex.server().sample(ex.now());
  RunTrace t = ex.take_trace();
  t.header["eta"] = cfg.eta;
  t.header["max_iters"] = max_iters;
  return t;
}

BaselineRun run_serial_pgd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                           std::uint64_t max_iters, ServerOptions server) {
  BaselineConfig c = cfg;
  c.kind = BaselineKind::SerialPGD;
  return run_pgd(runtime_for(x0, f, c, 1, DelayModel{}, max_iters, server), c);
}

BaselineRun run_sync_parallel_pgd(std::span<const double> x0, const Objective& f, const BaselineConfig& cfg,
                                  std::uint64_t W, const DelayModel& delay, std::uint64_t max_iters,
                                  ServerOptions server) {
  if (W < 1) throw ConfigError("need at least one worker");
  BaselineConfig c = cfg;
  c.kind = BaselineKind::SyncParallelPGD;
  return run_pgd(runtime_for(x0, f, c, W, delay, max_iters, server), c);
}

}  // namespace seacgd
