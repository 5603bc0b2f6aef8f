#include "seacgd/objective.hpp"

#include <cmath>
#include <mutex>
#include <random>
#include <sstream>

#include "seacgd/errors.hpp"
#include "seacgd/kernels.hpp"

namespace seacgd {

std::vector<double> SparseBlockVector::to_dense() const {
  std::vector<double> out(dimension, 0.0);
  for (std::size_t i = 0; i < values.size(); ++i) out[block.begin + i] = values[i];
  return out;
}

void ObjectiveSpec::validate() const {
  if (d < 2) throw ContractViolation("objective dimension must be >= 2");
  if (!(lipschitz_L > 0.0)) throw ContractViolation("lipschitz_L must be positive");
  if (!(hessian_rho > 0.0)) throw ContractViolation("hessian_rho must be positive");
}

void LandscapeParams::validate() const {
  if (!(grad_floor_phi > 0.0) || !(curvature_gamma > 0.0) || !(optima_radius_zeta > 0.0))
    throw ContractViolation("landscape parameters must be strictly positive");
}

const char* to_string(PointTag tag) {
  switch (tag) {
    case PointTag::LargeGradient: return "LargeGradient";
    case PointTag::SaddleRegion: return "SaddleRegion";
    case PointTag::NearSecondOrderStationary: return "NearSecondOrderStationary";
  }
  return "?";
}

Objective::Objective(ObjectiveSpec spec) : spec_(spec) { spec_.validate(); }

void Objective::check_point(std::span<const double> x) const {
  if (x.size() != spec_.d) {
    std::ostringstream msg;
    msg << "dimension mismatch: expected " << spec_.d << ", got " << x.size();
    throw ContractViolation(msg.str());
  }
}

void Objective::check_block(BlockRange b) const {
  if (b.empty()) throw ContractViolation("empty block");
  if (b.end > spec_.d) throw ContractViolation("block exceeds dimension");
}

SparseBlockVector Objective::block_gradient(std::span<const double> x, BlockRange b) const {
  check_point(x);
  check_block(b);
  SparseBlockVector g{spec_.d, b, std::vector<double>(b.size())};
  block_gradient_into(x, b, g.values);
  return g;
}

std::vector<double> Objective::gradient(std::span<const double> x) const {
  check_point(x);
  std::vector<double> g(spec_.d);
  block_gradient_into(x, BlockRange{0, spec_.d}, g);
  return g;
}

void Objective::hessian_vector_product_into(std::span<const double> x, std::span<const double> v,
                                            std::span<double> out) const {
  const double vn = std::sqrt(kernels::squared_norm(v));
  if (vn == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    return;
  }
  const double h = fd_step_ / vn;
  const std::size_t d = spec_.d;
  std::vector<double> xp(x.begin(), x.end()), xm(x.begin(), x.end());
  kernels::axpy(h, v, xp);
  kernels::axpy(-h, v, xm);
  std::vector<double> gm(d);
  block_gradient_into(xp, BlockRange{0, d}, out);
  block_gradient_into(xm, BlockRange{0, d}, gm);
  kernels::axpby(-1.0 / (2.0 * h), gm, 1.0 / (2.0 * h), out);
}

std::vector<double> Objective::hessian_vector_product(std::span<const double> x,
                                                      std::span<const double> v) const {
  check_point(x);
  check_point(v);
  std::vector<double> out(spec_.d);
  hessian_vector_product_into(x, v, out);
  return out;
}

// ---------------------------------------------------------------------------

ObjectiveSpec QuarticSaddle::constants(std::size_t d, double box_radius) {
  if (d < 2) throw ContractViolation("quartic needs d >= 2");
  if (!(box_radius > 0.0)) throw ContractViolation("box_radius must be positive");
  const double dd = static_cast<double>(d);
  const double nr = static_cast<double>(d / 2);
  const double ns = dd - nr;
  // Hessian eigenvalues: (2/d) n_r a(r) with a = 24(r-1)^2 - 4, and (8/d) n_s.
  const double a_max = std::max(24.0 * box_radius * box_radius - 4.0, 4.0);
  const double lip = std::max(2.0 / dd * nr * a_max, 8.0 / dd * ns);
  // |a'(r)| = 48|r-1| and |dr| <= (2/d) sqrt(n_r) |dx|.
  const double rho = (2.0 / dd) * (2.0 / dd) * std::pow(nr, 1.5) * 48.0 * box_radius;
  return ObjectiveSpec{d, lip, rho, -dd / 4.0};
}

QuarticSaddle::QuarticSaddle(std::size_t d, double box_radius)
    : Objective(constants(d, box_radius)), n_r_(d / 2), box_radius_(box_radius) {}

void QuarticSaddle::project(std::span<const double> x, std::span<double> z) const {
  z[0] = kernels::sum(x.first(n_r_));
  z[1] = kernels::sum(x.subspan(n_r_));
}

double QuarticSaddle::outer_value(std::span<const double> z) const {
  const double d = static_cast<double>(dimension());
  const double a = 2.0 * z[0] / d - 1.0;
  const double b = 2.0 * z[1] / d + 1.0;
  const double a2 = a * a;
  return d * (a2 * a2 - a2 + b * b);
}

void QuarticSaddle::outer_gradient(std::span<const double> z, std::span<double> gz) const {
  const double d = static_cast<double>(dimension());
  const double a = 2.0 * z[0] / d - 1.0;
  const double b = 2.0 * z[1] / d + 1.0;
  gz[0] = 8.0 * a * a * a - 4.0 * a;
  gz[1] = 4.0 * b;
}

void QuarticSaddle::block_gram(BlockRange b, std::span<double> gram) const {
  const std::size_t in_r = b.begin < n_r_ ? std::min(b.end, n_r_) - b.begin : 0;
  gram[0] = static_cast<double>(in_r);
  gram[1] = 0.0;
  gram[2] = 0.0;
  gram[3] = static_cast<double>(b.size() - in_r);
}

void QuarticSaddle::lift_add(std::span<const double> c, BlockRange b, std::span<double> x_block) const {
  for (std::size_t i = b.begin; i < b.end; ++i) x_block[i - b.begin] += i < n_r_ ? c[0] : c[1];
}

double QuarticSaddle::eval(std::span<const double> x) const {
  check_point(x);
  double z[2];
  project(x, z);
  return outer_value(z);
}

void QuarticSaddle::block_gradient_into(std::span<const double> x, BlockRange b, std::span<double> out) const {
  check_point(x);
  check_block(b);
  double z[2], gz[2];
  project(x, z);
  outer_gradient(z, gz);
  for (std::size_t i = b.begin; i < b.end; ++i) out[i - b.begin] = i < n_r_ ? gz[0] : gz[1];
}

void QuarticSaddle::hessian_vector_product_into(std::span<const double> x, std::span<const double> v,
                                                std::span<double> out) const {
  check_point(x);
  check_point(v);
  const double d = static_cast<double>(dimension());
  double z[2];
  project(x, z);
  const double a = 2.0 * z[0] / d - 1.0;
  const double hr = 2.0 / d * (24.0 * a * a - 4.0) * kernels::sum(v.first(n_r_));
  const double hs = 8.0 / d * kernels::sum(v.subspan(n_r_));
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_r_), hr);
  std::fill(out.begin() + static_cast<std::ptrdiff_t>(n_r_), out.end(), hs);
}

std::vector<double> QuarticSaddle::point_at(double r, double s) const {
  const std::size_t d = dimension();
  const double dd = static_cast<double>(d);
  std::vector<double> x(d);
  // Even d gives exactly r and -1 per coordinate at the saddle.
  const double xr = r * dd / (2.0 * static_cast<double>(n_r_));
  const double xs = s * dd / (2.0 * static_cast<double>(d - n_r_));
  std::fill(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(n_r_), xr);
  std::fill(x.begin() + static_cast<std::ptrdiff_t>(n_r_), x.end(), xs);
  return x;
}

std::vector<double> QuarticSaddle::minimum_point(bool upper) const {
  const double off = 1.0 / std::sqrt(2.0);
  return point_at(upper ? 1.0 + off : 1.0 - off, -1.0);
}

std::pair<double, double> QuarticSaddle::rs(std::span<const double> x) const {
  check_point(x);
  double z[2];
  project(x, z);
  const double d = static_cast<double>(dimension());
  return {2.0 * z[0] / d, 2.0 * z[1] / d};
}

// ---------------------------------------------------------------------------

PointClass classify_point(const Objective& f, std::span<const double> x, double eps, int power_iters,
                          std::uint64_t seed) {
  const ObjectiveSpec& sp = f.spec();
  if (x.size() != sp.d) throw ContractViolation("dimension mismatch in classify_point");
  if (!(eps > 0.0)) throw ContractViolation("eps must be positive");
  if (power_iters < 1) throw ContractViolation("power_iters must be positive");
  if (eps > sp.lipschitz_L * sp.lipschitz_L / sp.hessian_rho)
    throw RegimeError("classify_point requires eps <= L^2/rho");

  PointClass pc;
  const std::vector<double> g = f.gradient(x);
  pc.grad_norm = std::sqrt(kernels::squared_norm(g));

  // Power iteration on A = c I - H with c = L. Since ||H|| <= L, A is PSD and
  // its top eigenvalue is c - lambda_min(H).
  const double c = sp.lipschitz_L;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(sp.d), hv(sp.d);
  for (double& vi : v) vi = normal(rng);
  kernels::scale(1.0 / std::sqrt(kernels::squared_norm(v)), v);

  const double tol = 1e-9 * c;
  double theta = 0.0;
  for (int it = 1; it <= power_iters; ++it) {
    f.hessian_vector_product_into(x, v, hv);
    kernels::axpby(c, v, -1.0, hv);  // hv = c v - H v
    theta = kernels::dot(v, hv);
    const double wn2 = kernels::squared_norm(hv);
    const double res2 = std::max(0.0, wn2 - theta * theta);
    pc.iterations = it;
    if (wn2 == 0.0) {
      pc.converged = true;
      break;
    }
    kernels::axpby(1.0 / std::sqrt(wn2), hv, 0.0, v);
    if (std::sqrt(res2) <= tol) {
      pc.converged = true;
      break;
    }
  }
  pc.min_eig_estimate = c - theta;

  if (pc.grad_norm > eps) {
    pc.tag = PointTag::LargeGradient;
  } else if (pc.min_eig_estimate < -std::sqrt(sp.hessian_rho * eps)) {
    pc.tag = PointTag::SaddleRegion;
  } else {
    pc.tag = PointTag::NearSecondOrderStationary;
  }
  return pc;
}

// ---------------------------------------------------------------------------

namespace {

struct Registry {
  std::mutex mu;
  std::map<std::string, ObjectiveFactory> factories;

  Registry() {
    factories["paper_quartic"] = [](std::size_t d, const ObjectiveOptions& opts) {
      double box = 1.0;
      if (auto it = opts.find("box_radius"); it != opts.end()) box = it->second;
      return std::unique_ptr<Objective>(new QuarticSaddle(d, box));
    };
  }
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

void register_objective(const std::string& key, ObjectiveFactory factory) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.factories[key] = std::move(factory);
}

std::unique_ptr<Objective> make_objective(const std::string& key, std::size_t d, const ObjectiveOptions& options) {
  auto& r = registry();
  ObjectiveFactory factory;
  {
    std::lock_guard lock(r.mu);
    auto it = r.factories.find(key);
    if (it == r.factories.end()) throw ConfigError("unknown objective: " + key);
    factory = it->second;
  }
  return factory(d, options);
}

std::vector<std::string> registered_objectives() {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  std::vector<std::string> keys;
  for (const auto& [k, _] : r.factories) keys.push_back(k);
  return keys;
}

}  // namespace seacgd
