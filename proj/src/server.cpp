#include "seacgd/server.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "seacgd/errors.hpp"
#include "seacgd/kernels.hpp"

namespace seacgd {

std::vector<std::uint64_t> DelayedSnapshot::block_ages(std::span<const std::uint64_t> current) const {
  std::vector<std::uint64_t> ages(current.size());
  for (std::size_t p = 0; p < current.size(); ++p) ages[p] = current[p] - fetch_counts[p];
  return ages;
}

Server::Server(const Objective& f, std::unique_ptr<IterateStorage> storage, BlockPartition partition,
               HyperParams hp, ServerOptions options)
    : f_(f),
      storage_(std::move(storage)),
      partition_(std::move(partition)),
      hp_(hp),
      opt_(options),
      window_(std::max<std::uint64_t>(hp.tau, 1), storage_->value()) {
  if (partition_.d != f_.dimension() || storage_->dimension() != f_.dimension())
    throw ContractViolation("server: partition, storage and objective dimensions differ");
  if (hp_.tau + 1 < partition_.W()) {
    std::ostringstream msg;
    msg << "tau=" << hp_.tau << " cannot cover W=" << partition_.W() << " blocks";
    throw ConfigError(msg.str());
  }
  if (!(hp_.eta >= 0.0)) throw ContractViolation("step size must be non-negative");
  counts_.assign(partition_.W(), 0);
  last_.assign(partition_.W(), -1);
  recording_.assign(partition_.W(), false);
  trace_.header["dimension"] = f_.dimension();
  trace_.header["workers"] = partition_.W();
  observers_ = opt_.observers;
  if (opt_.trace_every > 0) sample(0.0);
}

DelayedSnapshot Server::fetch(std::uint64_t worker, double time) {
  if (worker >= partition_.W()) throw ContractViolation("worker id out of range");
  DelayedSnapshot s;
  s.worker = worker;
  storage_->snapshot(s.values);
  s.fetch_counts = counts_;
  s.taken_at_j = j_;
  s.epoch = epoch_;
  s.time = time;
  record_event(WorkerEventKind::Fetch, worker, time, 0.0);
  return s;
}

void Server::compute_update(const DelayedSnapshot& snap, std::vector<double>& update) const {
  storage_->compute_update(snap.values, snap.worker, hp_.eta, update);
}

bool Server::admissible(std::uint64_t worker) const {
  const auto k = static_cast<std::int64_t>(j_);
  const auto slack = static_cast<std::int64_t>(hp_.tau) + 1;
  scratch_.resize(partition_.W());
  for (std::size_t p = 0; p < partition_.W(); ++p) scratch_[p] = p == worker ? k + slack : last_[p] + slack;
  std::sort(scratch_.begin(), scratch_.end());
  for (std::size_t m = 0; m < scratch_.size(); ++m)
    if (scratch_[m] < k + static_cast<std::int64_t>(m) + 1) return false;
  return true;
}

ApplyRecord Server::apply(const DelayedSnapshot& snap, std::span<const double> update, double time) {
  if (snap.epoch != epoch_) throw ContractViolation("snapshot predates the last perturbation");
  const std::uint64_t b = snap.worker;
  ApplyRecord rec;
  rec.server = this;
  rec.j = j_;
  rec.worker = b;
  rec.block = b;
  rec.time = time;
  rec.update = update;

  for (std::size_t p = 0; p < partition_.W(); ++p)
    rec.max_age = std::max(rec.max_age, counts_[p] - snap.fetch_counts[p]);
  audit_.max_age_seen = std::max(audit_.max_age_seen, rec.max_age);
  if (rec.max_age > hp_.tau) {
    ++audit_.age_violations;
    if (opt_.strict_staleness) throw std::logic_error("bounded-delay contract violated");
  }

  rec.E_prev = window_.energy(hp_.L);
  rec.step_sq = storage_->apply(b, update);
  rec.f = storage_->value();
  window_.push_step(rec.f, rec.step_sq);
  rec.E_next = window_.energy(hp_.L);

  const auto k = static_cast<std::int64_t>(j_);
  last_[b] = k;
  ++counts_[b];
  ++j_;
  ++audit_.applies;

  if (k >= static_cast<std::int64_t>(hp_.tau)) {
    const std::int64_t oldest = k - static_cast<std::int64_t>(hp_.tau);
    for (std::int64_t lp : last_) {
      if (lp < oldest) {
        ++audit_.coverage_violations;
        if (opt_.strict_staleness) throw std::logic_error("coverage window violated");
        break;
      }
    }
  }

  rec.descent = check_descent(rec.E_prev, rec.E_next, rec.step_sq, hp_, opt_.descent_tol);
  if (audit_.applies == 1) {
    audit_.min_corollary_slack = rec.descent.corollary_slack;
    audit_.min_lemma_slack = rec.descent.lemma_slack;
  } else {
    audit_.min_corollary_slack = std::min(audit_.min_corollary_slack, rec.descent.corollary_slack);
    audit_.min_lemma_slack = std::min(audit_.min_lemma_slack, rec.descent.lemma_slack);
  }
  if (!rec.descent.corollary_ok) ++audit_.corollary_violations;
  if (!rec.descent.lemma_ok) ++audit_.lemma_violations;

  const double fstar = f_.spec().global_min_fstar;
  if (rec.f < fstar - 1e-9 * std::max(1.0, std::abs(fstar))) ++audit_.fstar_violations;

  if (opt_.target_f && !trace_.time_to_target && rec.f <= *opt_.target_f) {
    trace_.time_to_target = time;
    trace_.iters_to_target = j_;
  }

  record_event(WorkerEventKind::ApplyUpdate, b, time, rec.step_sq);
  if (opt_.trace_every > 0 && j_ % opt_.trace_every == 0) sample(time);
  for (const auto& obs : observers_) obs(rec);
  rec.update = {};
  return rec;
}

void Server::perturb(std::span<const double> xi, double time) {
  storage_->add_dense(xi);
  window_.reset(storage_->value());
  ++epoch_;
  if (opt_.trace_every > 0) sample(time);
}

void Server::note_gradient_done(std::uint64_t worker, double time) {
  record_event(WorkerEventKind::GradientDone, worker, time, 0.0);
}

void Server::sample(double time) {
  trace_.samples.push_back(TraceSample{time, j_, storage_->value(), energy(), storage_->grad_norm(), phase_});
}

void Server::record_event(WorkerEventKind kind, std::uint64_t worker, double time, double step_sq) {
  if (!opt_.record_worker_events) return;
  if (kind == WorkerEventKind::Fetch) {
    recording_[worker] = trace_.events.size() < opt_.worker_event_limit;
    if (!recording_[worker]) trace_.events_truncated = true;
  }
  if (!recording_[worker]) return;
  const double f = storage_->value();
  trace_.events.push_back(WorkerEvent{time, worker, kind, j_, worker, step_sq, f, energy()});
}

nlohmann::json to_json(const AuditStats& a) {
  return nlohmann::json{{"applies", a.applies},
                        {"max_age_seen", a.max_age_seen},
                        {"age_violations", a.age_violations},
                        {"coverage_violations", a.coverage_violations},
                        {"corollary_violations", a.corollary_violations},
                        {"lemma_violations", a.lemma_violations},
                        {"min_corollary_slack", a.min_corollary_slack},
                        {"min_lemma_slack", a.min_lemma_slack},
                        {"fstar_violations", a.fstar_violations}};
}

AuditStats audit_event_log(std::span<const WorkerEvent> events, std::uint64_t W, std::uint64_t tau) {
  AuditStats a;
  std::vector<std::uint64_t> counts(W, 0);
  std::vector<std::vector<std::uint64_t>> fetched(W, std::vector<std::uint64_t>(W, 0));
  std::vector<std::int64_t> last(W, -1);
  std::int64_t k = 0;
  for (const WorkerEvent& e : events) {
    if (e.worker >= W) throw ContractViolation("event worker id out of range");
    if (e.kind == WorkerEventKind::Fetch) {
      fetched[e.worker] = counts;
    } else if (e.kind == WorkerEventKind::ApplyUpdate) {
      std::uint64_t age = 0;
      for (std::size_t p = 0; p < W; ++p) age = std::max(age, counts[p] - fetched[e.worker][p]);
      a.max_age_seen = std::max(a.max_age_seen, age);
      if (age > tau) ++a.age_violations;
      ++counts[e.block];
      last[e.block] = k;
      if (k >= static_cast<std::int64_t>(tau)) {
        const std::int64_t oldest = k - static_cast<std::int64_t>(tau);
        if (std::any_of(last.begin(), last.end(), [&](std::int64_t lp) { return lp < oldest; }))
          ++a.coverage_violations;
      }
      ++k;
      ++a.applies;
    }
  }
  return a;
}

SparseBlockVector sw_acgd_step(const Objective& f, std::span<const double> snapshot, BlockRange block, double eta) {
  SparseBlockVector u = f.block_gradient(snapshot, block);
  kernels::scale(-eta, u.values);
  return u;
}

double apply_update(std::vector<double>& x, const SparseBlockVector& u, HamiltonianWindow& window,
                    const Objective& f) {
  if (u.dimension != x.size() || u.block.end > x.size()) throw ContractViolation("update does not fit the iterate");
  const double sq =
      kernels::add_and_squared_norm(u.values, std::span<double>(x).subspan(u.block.begin, u.block.size()));
  window.push_step(f.eval(x), sq);
  return sq;
}

}  // namespace seacgd
