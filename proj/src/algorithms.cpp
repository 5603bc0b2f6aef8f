#include "seacgd/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "seacgd/errors.hpp"
#include "seacgd/kernels.hpp"

namespace seacgd {

const char* to_string(Outcome o) {
  return o == Outcome::SecondOrderStationary ? "SecondOrderStationary" : "IterationCapReached";
}

PhasePlan PhasePlan::from(const HyperParams& hp, std::uint64_t seed) {
  PhasePlan p;
  p.lg_iters = hp.tau + 1;
  p.T = hp.T;
  p.F = hp.F_threshold;
  p.radius = hp.perturb_radius();
  p.cap = hp.t_max;
  p.seed = seed;
  p.eps = hp.eps;
  return p;
}

std::uint64_t perturbation_seed(std::uint64_t run_seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(run_seed), static_cast<std::uint32_t>(run_seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32), 0x70657274u};
  std::mt19937_64 mix(seq);
  return mix();
}

std::vector<double> uniform_ball_sample(std::span<const double> center, double radius, std::uint64_t seed) {
  if (!(radius >= 0.0)) throw ContractViolation("ball radius must be non-negative");
  std::vector<double> out(center.begin(), center.end());
  if (radius == 0.0 || out.empty()) return out;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> dir(out.size());
  double n2 = 0.0;
  while (n2 == 0.0) {
    for (double& v : dir) v = normal(rng);
    n2 = kernels::serial::squared_norm(dir);
  }
  // U in (0,1]: generate_canonical is [0,1), flip it.
  const double u = 1.0 - std::generate_canonical<double, 53>(rng);
  const double len = radius * std::pow(u, 1.0 / static_cast<double>(out.size()));
  kernels::axpy(len / std::sqrt(n2), dir, out);
  return out;
}

namespace {

std::vector<double> ball_offset(std::size_t d, double radius, std::uint64_t seed) {
  const std::vector<double> zero(d, 0.0);
  return uniform_ball_sample(zero, radius, seed);
}

void log_phase(Executor& ex, Phase phase, std::uint64_t j_begin, double entry, double exit, double F,
               const char* decision) {
  ex.trace().phases.push_back(
      PhaseEvent{phase, j_begin, ex.server().j(), ex.now(), entry, exit, F, decision});
}

}  // namespace

PhaseResult lg_acgd(Executor& ex, const HyperParams& hp) {
  Server& s = ex.server();
  s.set_phase(Phase::LG);
  PhaseResult r;
  r.phase = Phase::LG;
  const std::uint64_t j0 = s.j();
  r.entry_energy = s.energy();
  r.global_iters_used = ex.advance(hp.tau + 1);
  r.truncated = r.global_iters_used < hp.tau + 1;
  r.final_energy = s.energy();
  r.energy_drop = r.entry_energy - r.final_energy;
  r.final_iterate = s.materialize();
  log_phase(ex, Phase::LG, j0, r.entry_energy, r.final_energy, hp.F_threshold,
            r.energy_drop < hp.F_threshold ? "perturb" : "continue");
  return r;
}

PhaseResult p_acgd(Executor& ex, const HyperParams& hp, std::uint64_t rng_seed, PerturbOptions opts) {
  Server& s = ex.server();
  PhaseResult r;
  r.phase = Phase::PERTURB;
  const std::uint64_t j0 = s.j();
  r.entry_energy = s.energy();
  const double radius = opts.radius.value_or(hp.perturb_radius());
  ex.perturb(ball_offset(s.objective().dimension(), radius, rng_seed));
  s.set_phase(Phase::PERTURB);
  r.global_iters_used = ex.advance(hp.T);
  r.truncated = r.global_iters_used < hp.T;
  r.final_energy = s.energy();
  r.energy_drop = r.entry_energy - r.final_energy;
  r.final_iterate = s.materialize();
  log_phase(ex, Phase::PERTURB, j0, r.entry_energy, r.final_energy, hp.F_threshold,
            r.energy_drop < hp.F_threshold ? "stop" : "escaped");
  return r;
}

TerminationReport run_phases(Executor& ex, const PhasePlan& plan) {
  if (plan.lg_iters < 1 || plan.T < 1) throw ConfigError("phase lengths must be positive");
  Server& s = ex.server();
  const Objective& f = s.objective();
  TerminationReport rep;
  std::uint64_t used = 0;
  std::uint64_t perturb_index = 0;
  auto budget = [&](std::uint64_t want) { return std::min(want, plan.cap > used ? plan.cap - used : 0); };
  bool stopped = false;

  while (!stopped) {
    s.set_phase(Phase::LG);
    const std::uint64_t j0 = s.j();
    const double entry = s.energy();
    const std::uint64_t n = ex.advance(budget(plan.lg_iters));
    used += n;
    ++rep.lg_phases;
    const double exit = s.energy();
    if (n < plan.lg_iters) {
      log_phase(ex, Phase::LG, j0, entry, exit, plan.F, "cap");
      break;
    }
    const bool small = entry - exit < plan.F;
    log_phase(ex, Phase::LG, j0, entry, exit, plan.F, small ? "perturb" : "continue");
    if (!small) continue;

    std::vector<double> x_s = s.materialize();
    const double E_s = exit;
    const std::uint64_t jp = s.j();
    ex.perturb(ball_offset(f.dimension(), plan.radius, perturbation_seed(plan.seed, perturb_index++)));
    ++rep.total_perturbations;
    ++rep.perturb_phases;
    s.set_phase(Phase::PERTURB);
    const std::uint64_t m = ex.advance(budget(plan.T));
    used += m;
    const double E_T = s.energy();
    if (m < plan.T) {
      log_phase(ex, Phase::PERTURB, jp, E_s, E_T, plan.F, "cap");
      break;
    }
    if (E_s - E_T < plan.F) {
      log_phase(ex, Phase::PERTURB, jp, E_s, E_T, plan.F, "stop");
      rep.outcome = Outcome::SecondOrderStationary;
      rep.final_iterate = std::move(x_s);
      stopped = true;
    } else {
      log_phase(ex, Phase::PERTURB, jp, E_s, E_T, plan.F, "escaped");
      ++rep.escapes;
    }
  }

  if (!stopped) {
    rep.outcome = Outcome::IterationCapReached;
    rep.final_iterate = s.materialize();
  }
  rep.total_global_iters = used;
  rep.final_f = f.eval(rep.final_iterate);
  s.set_phase(Phase::DONE);
  s.sample(ex.now());
  if (plan.certify && plan.eps > 0.0)
    rep.certificate = classify_point(f, rep.final_iterate, plan.eps, plan.power_iters, plan.seed);
  return rep;
}

TerminationReport se_acgd(Executor& ex, const HyperParams& hp, const SeAcgdOptions& opts) {
  PhasePlan plan = PhasePlan::from(hp, opts.seed);
  plan.power_iters = opts.power_iters;
  plan.certify = opts.certify;
  if (opts.cap) plan.cap = *opts.cap;
  ex.trace().algorithm = "SEACGD";
  nlohmann::json hj;
  to_json(hj, hp);
  ex.trace().header["hp"] = hj;
  return run_phases(ex, plan);
}

AlgorithmRun run_se_acgd(const RuntimeConfig& cfg, const SeAcgdOptions& opts, bool parallel) {
  auto ex = parallel ? make_parallel(cfg) : make_simulator(cfg);
  AlgorithmRun run;
  run.report = se_acgd(*ex, cfg.hp, opts);
  run.trace = ex->take_trace();
  run.trace.header["outcome"] = to_string(run.report.outcome);
  return run;
}

}  // namespace seacgd
