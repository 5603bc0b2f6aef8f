#include "seacgd/hyperparams.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "seacgd/errors.hpp"
#include "seacgd/objective.hpp"

namespace seacgd {

void UserInputs::validate() const {
  if (!(eps > 0.0)) throw ConfigError("eps must be positive");
  if (tau < 1) throw ConfigError("tau must be >= 1");
  if (W < 1) throw ConfigError("W must be >= 1");
  if (tau + 1 < W) {
    std::ostringstream msg;
    msg << "tau=" << tau << " is smaller than W-1=" << W - 1;
    throw ConfigError(msg.str());
  }
  if (!(L > 0.0) || !(rho > 0.0)) throw ConfigError("L and rho must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0,1)");
  if (d < 1) throw ConfigError("d must be positive");
  if (!x0.empty() && x0.size() != d) throw ConfigError("x0 has the wrong dimension");
  if (!(mu >= 1.0)) throw ConfigError("mu must be >= 1");
  if (eps > L * L / rho) {
    std::ostringstream msg;
    msg << "eps=" << eps << " exceeds L^2/rho=" << L * L / rho;
    throw RegimeError(msg.str());
  }
  if (!(delta_f() > 0.0)) throw DegenerateProblemError("f(x0) - f* must be positive");
}

UserInputs make_user_inputs(const Objective& f, std::vector<double> x0, std::uint64_t W, std::uint64_t tau,
                            double eps, double delta, double mu) {
  const ObjectiveSpec& sp = f.spec();
  UserInputs in;
  in.L = sp.lipschitz_L;
  in.rho = sp.hessian_rho;
  in.fstar = sp.global_min_fstar;
  in.d = sp.d;
  in.f_x0 = f.eval(x0);
  in.x0 = std::move(x0);
  in.W = W;
  in.tau = tau;
  in.eps = eps > 0.0 ? eps : 0.25 / sp.hessian_rho;
  in.delta = delta;
  in.mu = mu;
  return in;
}

bool beta_feasible(std::uint64_t tau, double beta) {
  const double t = static_cast<double>(tau);
  return beta <= 0.5 && 15.0 / 8.0 * std::pow(t, 0.5 - beta) - std::sqrt(t) - 0.5 >= 0.0;
}

double solve_beta(std::uint64_t tau) {
  if (tau < 1) throw ConfigError("solve_beta needs tau >= 1");
  const double t = static_cast<double>(tau);
  const double ratio = 8.0 / 15.0 * (std::sqrt(t) + 0.5);
  if (tau == 1 || ratio <= 1.0) return 0.5;
  double beta = std::min(0.5, 0.5 - std::log(ratio) / std::log(t));
  // The closed form sits on the boundary; step off it if rounding landed outside.
  while (beta > 0.0 && !beta_feasible(tau, beta)) beta = std::nextafter(beta, 0.0);
  if (!(beta > 0.0)) {
    std::ostringstream msg;
    msg << "no positive beta for tau=" << tau;
    throw ConfigError(msg.str());
  }
  return beta;
}

namespace {

double lemma_denominator(const UserInputs& in, double beta, double iota, double chi) {
  return 2.0 * in.L * std::pow(static_cast<double>(in.tau), 0.5 - beta) * iota * chi;
}

double sigma_of(const UserInputs& in) {
  const double s = 1280.0 * std::sqrt(static_cast<double>(in.d)) * in.delta_f() * in.L *
                   static_cast<double>(in.tau) / (std::sqrt(std::numbers::pi) * in.eps * in.eps * in.delta);
  return std::max(s, 8.0);
}

}  // namespace

std::uint64_t compute_t_max(std::uint64_t T, double delta_f, double F) {
  const double v = std::ceil(static_cast<double>(T) * delta_f / F);
  if (!(v < 1.8e19)) return std::numeric_limits<std::uint64_t>::max();
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(v));
}

HyperParams derive_params(const UserInputs& in) {
  in.validate();
  HyperParams hp;
  hp.tau = in.tau;
  hp.W = in.W;
  hp.L = in.L;
  hp.rho = in.rho;
  hp.eps = in.eps;
  hp.delta = in.delta;
  hp.mu = in.mu;
  hp.d = in.d;
  hp.delta_f = in.delta_f();

  const double sre = std::sqrt(in.rho * in.eps);
  const double t = static_cast<double>(in.tau);
  hp.sigma = sigma_of(in);
  hp.iota = in.mu * std::log2(hp.sigma);
  hp.chi = std::max(1.0, sre / (in.L * in.L));
  hp.beta = solve_beta(in.tau);
  const double tpow = std::pow(t, 0.5 - hp.beta);
  hp.eta = 1.0 / (2.0 * in.L * tpow * hp.iota * hp.chi);
  hp.r = hp.eta * in.eps * in.L;
  hp.phi = 5.0 * in.eps / (4.0 * in.L * tpow * hp.iota * hp.chi);
  hp.F_threshold = in.L * (1.0 / (hp.eta * in.L) - std::sqrt(t) - 0.5) * hp.eta * hp.eta * in.eps * in.eps;
  hp.gamma = in.delta * hp.F_threshold / hp.delta_f;
  hp.T = static_cast<std::uint64_t>(
      std::ceil(std::log2(hp.sigma * hp.iota * hp.iota * hp.chi * hp.chi) / (hp.eta * sre)));
  hp.r0 = hp.r * hp.gamma * std::sqrt(std::numbers::pi) / (2.0 * std::sqrt(static_cast<double>(in.d)));
  hp.M = hp.eta * in.eps;
  hp.t_max = compute_t_max(hp.T, hp.delta_f, hp.F_threshold);

  if (!beta_feasible(in.tau, hp.beta)) throw std::logic_error("derived beta violates its constraint");
  if (!(hp.eta * in.L <= 0.5)) throw std::logic_error("derived eta*L exceeds 1/2");
  if (!(hp.sigma >= 8.0) || (in.mu >= 1.0 && !(hp.iota >= 3.0)))
    throw std::logic_error("derived sigma/iota below their floors");
  if (!(hp.F_threshold >= 3.0 / 8.0 * in.L * hp.eta * hp.eta * in.eps * in.eps * (1.0 - 1e-12)))
    throw std::logic_error("derived F below (3/8) L eta^2 eps^2");
  return hp;
}

double max_step_size(const UserInputs& in, double beta) {
  const double sigma = sigma_of(in);
  const double iota = in.mu * std::log2(sigma);
  const double chi = std::max(1.0, std::sqrt(in.rho * in.eps) / (in.L * in.L));
  return 1.0 / lemma_denominator(in, beta, iota, chi);
}

bool validate_step_size(double eta, const UserInputs& in, double beta) {
  return eta > 0.0 && eta <= max_step_size(in, beta);
}

void to_json(nlohmann::json& j, const HyperParams& hp) {
  j = nlohmann::json{{"sigma", hp.sigma}, {"iota", hp.iota},   {"chi", hp.chi},
                     {"beta", hp.beta},   {"eta", hp.eta},     {"r", hp.r},
                     {"phi", hp.phi},     {"F_threshold", hp.F_threshold},
                     {"gamma", hp.gamma}, {"T", hp.T},         {"r0", hp.r0},
                     {"M", hp.M},         {"t_max", hp.t_max}, {"tau", hp.tau},
                     {"W", hp.W},         {"L", hp.L},         {"rho", hp.rho},
                     {"eps", hp.eps},     {"delta", hp.delta}, {"mu", hp.mu},
                     {"d", hp.d},         {"delta_f", hp.delta_f}};
}

void from_json(const nlohmann::json& j, HyperParams& hp) {
  j.at("sigma").get_to(hp.sigma);
  j.at("iota").get_to(hp.iota);
  j.at("chi").get_to(hp.chi);
  j.at("beta").get_to(hp.beta);
  j.at("eta").get_to(hp.eta);
  j.at("r").get_to(hp.r);
  j.at("phi").get_to(hp.phi);
  j.at("F_threshold").get_to(hp.F_threshold);
  j.at("gamma").get_to(hp.gamma);
  j.at("T").get_to(hp.T);
  j.at("r0").get_to(hp.r0);
  j.at("M").get_to(hp.M);
  j.at("t_max").get_to(hp.t_max);
  j.at("tau").get_to(hp.tau);
  j.at("W").get_to(hp.W);
  j.at("L").get_to(hp.L);
  j.at("rho").get_to(hp.rho);
  j.at("eps").get_to(hp.eps);
  j.at("delta").get_to(hp.delta);
  j.at("mu").get_to(hp.mu);
  j.at("d").get_to(hp.d);
  j.at("delta_f").get_to(hp.delta_f);
}

}  // namespace seacgd
