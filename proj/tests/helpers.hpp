#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "seacgd/hyperparams.hpp"
#include "seacgd/objective.hpp"

namespace testutil {

// f(x) = 1/2 ||x||^2. Its Hessian is constant; rho is nominal.
class HalfSquaredNorm final : public seacgd::Objective {
 public:
  explicit HalfSquaredNorm(std::size_t d) : Objective(seacgd::ObjectiveSpec{d, 1.0, 1e-9, 0.0}) {}

  double eval(std::span<const double> x) const override {
    check_point(x);
    double s = 0.0;
    for (double v : x) s += v * v;
    return 0.5 * s;
  }
  void block_gradient_into(std::span<const double> x, seacgd::BlockRange b, std::span<double> out) const override {
    check_point(x);
    check_block(b);
    for (std::size_t i = b.begin; i < b.end; ++i) out[i - b.begin] = x[i];
  }
};

// f(x) = sum x_i^4 / 4 + x_i^2 / 2, Hessian diag(3 x_i^2 + 1). Uses the
// default finite-difference Hessian-vector product.
class SeparableQuartic final : public seacgd::Objective {
 public:
  explicit SeparableQuartic(std::size_t d) : Objective(seacgd::ObjectiveSpec{d, 100.0, 100.0, 0.0}) {}

  double eval(std::span<const double> x) const override {
    check_point(x);
    double s = 0.0;
    for (double v : x) s += v * v * v * v / 4.0 + v * v / 2.0;
    return s;
  }
  void block_gradient_into(std::span<const double> x, seacgd::BlockRange b, std::span<double> out) const override {
    check_point(x);
    check_block(b);
    for (std::size_t i = b.begin; i < b.end; ++i) out[i - b.begin] = x[i] * x[i] * x[i] + x[i];
  }
};

inline std::vector<double> uniform_vector(std::size_t n, double lo, double hi, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Central finite difference of f along coordinate i.
inline double fd_partial(const seacgd::Objective& f, std::vector<double> x, std::size_t i, double h) {
  const double xi = x[i];
  x[i] = xi + h;
  const double fp = f.eval(x);
  x[i] = xi - h;
  const double fm = f.eval(x);
  return (fp - fm) / (2.0 * h);
}

// Step size, window and threshold set by hand, the rest zero.
inline seacgd::HyperParams manual_hp(double eta, std::uint64_t tau, double L, std::uint64_t W) {
  seacgd::HyperParams hp;
  hp.eta = eta;
  hp.tau = tau;
  hp.L = L;
  hp.W = W;
  hp.T = 1;
  hp.t_max = ~std::uint64_t{0};
  return hp;
}

}  // namespace testutil
