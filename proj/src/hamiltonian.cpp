#include "seacgd/hamiltonian.hpp"

#include <cmath>

#include "seacgd/errors.hpp"
#include "seacgd/hyperparams.hpp"

namespace seacgd {

HamiltonianWindow::HamiltonianWindow(std::uint64_t tau, double f0) : tau_(tau), f_(f0) {
  if (tau < 1) throw ContractViolation("Hamiltonian window needs tau >= 1");
  buf_.assign(tau, 0.0);
}

namespace {

constexpr double kCancellation = 16.0;

}  // namespace

void HamiltonianWindow::push_step(double new_f, double step_sq_norm) {
  if (!(step_sq_norm >= 0.0)) throw ContractViolation("step norm must be non-negative");
  const double oldest = buf_[head_];
  const double removed = plain_.value();
  // Every stored weight drops by one (the oldest leaves at weight 0), the new
  // entry enters at weight tau.
  weighted_.add(-removed);
  weighted_.add(static_cast<double>(tau_) * step_sq_norm);
  plain_.add(-oldest);
  plain_.add(step_sq_norm);
  if (oldest != 0.0) --nonzero_;
  if (step_sq_norm != 0.0) ++nonzero_;
  buf_[head_] = step_sq_norm;
  head_ = (head_ + 1) % tau_;
  f_ = new_f;
  ++j_;
  if (nonzero_ == 0) {
    plain_ = {};
    weighted_ = {};
    since_rebuild_ = 0;
  } else if (++since_rebuild_ >= tau_ || removed > kCancellation * weighted_.value()) {
    // Also rebuild when a large entry just left: the subtraction above then
    // cancels most of the sum's significant digits.
    rebuild();
  }
}

void HamiltonianWindow::reset(double f) {
  std::fill(buf_.begin(), buf_.end(), 0.0);
  head_ = 0;
  nonzero_ = 0;
  plain_ = {};
  weighted_ = {};
  since_rebuild_ = 0;
  f_ = f;
}

void HamiltonianWindow::rebuild() {
  plain_ = {};
  weighted_ = {};
  for (std::uint64_t k = 0; k < tau_; ++k) {
    const double n = buf_[(head_ + k) % tau_];
    plain_.add(n);
    weighted_.add(static_cast<double>(k + 1) * n);
  }
  since_rebuild_ = 0;
}

double HamiltonianWindow::energy(double L) const {
  return f_ + L / (2.0 * std::sqrt(static_cast<double>(tau_))) * weighted_.value();
}

std::vector<double> HamiltonianWindow::norms() const {
  std::vector<double> out(tau_);
  for (std::uint64_t k = 0; k < tau_; ++k) out[k] = buf_[(head_ + k) % tau_];
  return out;
}

double energy(const HamiltonianWindow& window, double L) { return window.energy(L); }

DescentReport check_descent(double E_prev, double E_next, double step_sq_norm, const HyperParams& hp, double tol) {
  DescentReport r;
  r.drop = E_prev - E_next;
  const double coef = hp.L * (1.0 / (hp.eta * hp.L) - std::sqrt(static_cast<double>(hp.tau)) - 0.5);
  r.lemma_bound = coef * step_sq_norm;
  r.corollary_bound = 3.0 / 8.0 * hp.L * step_sq_norm;
  r.lemma_slack = r.drop - r.lemma_bound;
  r.corollary_slack = r.drop - r.corollary_bound;
  r.lemma_ok = r.lemma_slack >= -tol;
  r.corollary_ok = r.corollary_slack >= -tol;
  return r;
}

}  // namespace seacgd
