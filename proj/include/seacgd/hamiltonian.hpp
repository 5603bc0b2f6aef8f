#pragma once

#include <cstdint>
#include <vector>

namespace seacgd {

struct HyperParams;

/// Sliding window of the last tau squared step norms, zero padded, plus f at
/// the current iterate:
///   E_j = f(x^j) + L/(2 sqrt(tau)) * sum_{k=1..tau} k * n_k
/// with n_1 the oldest and n_tau the newest stored norm.
///
/// The weighted sum is maintained incrementally with compensated summation and
/// rebuilt exactly every tau pushes, so drift never accumulates past one lap.
class HamiltonianWindow {
 public:
  explicit HamiltonianWindow(std::uint64_t tau, double f0 = 0.0);

  /// Evicts the oldest norm, appends step_sq_norm, sets f and advances j.
  void push_step(double new_f, double step_sq_norm);
  /// Zero history at value f (E = f). j is left alone.
  void reset(double f);

  double energy(double L) const;
  double kinetic_sum() const { return weighted_.value(); }  // sum k * n_k
  double current_f() const { return f_; }
  std::uint64_t current_j() const { return j_; }
  std::uint64_t tau() const { return tau_; }
  /// Stored norms, oldest first.
  std::vector<double> norms() const;

 private:
  struct Kahan {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
      const double y = v - c;
      const double t = sum + y;
      c = (t - sum) - y;
      sum = t;
    }
    double value() const { return sum; }
  };

  void rebuild();

  std::uint64_t tau_;
  std::vector<double> buf_;
  std::size_t head_ = 0;  // index of the oldest entry
  Kahan plain_;           // sum n_k
  Kahan weighted_;        // sum k n_k
  std::uint64_t since_rebuild_ = 0;
  std::uint64_t nonzero_ = 0;
  double f_;
  std::uint64_t j_ = 0;
};

double energy(const HamiltonianWindow& window, double L);

struct DescentReport {
  double drop = 0.0;             // E_prev - E_next
  double lemma_bound = 0.0;      // L (1/(eta L) - sqrt(tau) - 1/2) * step_sq
  double corollary_bound = 0.0;  // (3/8) L * step_sq
  double lemma_slack = 0.0;      // drop - lemma_bound
  double corollary_slack = 0.0;  // drop - corollary_bound
  bool lemma_ok = false;
  bool corollary_ok = false;
};

/// Both flags use drop >= bound - tol.
DescentReport check_descent(double E_prev, double E_next, double step_sq_norm, const HyperParams& hp,
                            double tol = 0.0);

}  // namespace seacgd
