#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

namespace seacgd {

class Objective;

struct UserInputs {
  double eps = 0.0;
  std::uint64_t tau = 1;
  double L = 0.0;
  double rho = 0.0;
  double delta = 0.1;
  std::size_t d = 0;
  std::vector<double> x0;  // may be left empty when only f_x0 is needed
  double f_x0 = 0.0;
  std::uint64_t W = 1;
  double mu = 1.0;
  double fstar = 0.0;

  double delta_f() const { return f_x0 - fstar; }
  /// Throws ConfigError / RegimeError / DegenerateProblemError.
  void validate() const;
};

/// Fills L, rho, fstar, d, x0 and f_x0 from the objective. eps <= 0 selects
/// the default eps = 0.25/rho, i.e. sqrt(rho*eps) = 1/2.
UserInputs make_user_inputs(const Objective& f, std::vector<double> x0, std::uint64_t W, std::uint64_t tau,
                            double eps = 0.0, double delta = 0.1, double mu = 1.0);

struct HyperParams {
  double sigma = 0.0;
  double iota = 0.0;
  double chi = 0.0;
  double beta = 0.0;
  double eta = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double F_threshold = 0.0;
  double gamma = 0.0;
  std::uint64_t T = 0;
  double r0 = 0.0;
  double M = 0.0;
  std::uint64_t t_max = 0;

  // Inputs the drivers need again, copied so a HyperParams is self-contained.
  std::uint64_t tau = 1;
  std::uint64_t W = 1;
  double L = 0.0;
  double rho = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  double mu = 1.0;
  std::size_t d = 0;
  double delta_f = 0.0;

  /// Radius of the perturbation ball, eta * r.
  double perturb_radius() const { return eta * r; }
};

/// Largest beta <= 1/2 with (15/8) tau^(1/2 - beta) >= sqrt(tau) + 1/2.
double solve_beta(std::uint64_t tau);
/// The constraint above, evaluated at an arbitrary beta.
bool beta_feasible(std::uint64_t tau, double beta);

HyperParams derive_params(const UserInputs& in);
/// ceil(T * delta_f / F), saturating at UINT64_MAX.
std::uint64_t compute_t_max(std::uint64_t T, double delta_f, double F);
/// Largest admissible step, 1/(2 L tau^(1/2-beta) iota chi), for these inputs.
double max_step_size(const UserInputs& in, double beta);
bool validate_step_size(double eta, const UserInputs& in, double beta);

void to_json(nlohmann::json& j, const HyperParams& hp);
void from_json(const nlohmann::json& j, HyperParams& hp);

}  // namespace seacgd
