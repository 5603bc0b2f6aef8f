#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace seacgd {

/// Half-open coordinate range [begin, end), zero based.
struct BlockRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool empty() const { return end <= begin; }
  bool contains(std::size_t i) const { return i >= begin && i < end; }
  bool operator==(const BlockRange&) const = default;
};

/// A vector of length `dimension` that is zero outside `block`.
struct SparseBlockVector {
  std::size_t dimension = 0;
  BlockRange block;
  std::vector<double> values;  // size block.size()

  double at(std::size_t i) const { return block.contains(i) ? values[i - block.begin] : 0.0; }
  std::vector<double> to_dense() const;
};

struct ObjectiveSpec {
  std::size_t d = 0;
  double lipschitz_L = 0.0;
  double hessian_rho = 0.0;
  double global_min_fstar = 0.0;

  void validate() const;
};

/// Strict-saddle triple (phi, gamma, zeta). Kept separate from the accuracy eps.
struct LandscapeParams {
  double grad_floor_phi = 0.0;
  double curvature_gamma = 0.0;
  double optima_radius_zeta = 0.0;

  void validate() const;
};

enum class PointTag { LargeGradient, SaddleRegion, NearSecondOrderStationary };

const char* to_string(PointTag tag);

struct PointClass {
  PointTag tag = PointTag::NearSecondOrderStationary;
  double grad_norm = 0.0;
  double min_eig_estimate = 0.0;
  bool converged = false;  // false: power iteration hit power_iters first
  int iterations = 0;
};

/// Objectives of the form f(x) = g(P^T x) with P a d-by-k matrix, k small.
///
/// The runtime uses this to keep the iterate as base + sum_b P_b c_b and to
/// hand workers the k projected statistics instead of a d-vector snapshot.
/// For such f the block gradient is P_b^T-shaped: grad_b f(x) = P_b grad g(z).
class LowRankStructure {
 public:
  virtual ~LowRankStructure() = default;

  virtual std::size_t rank() const = 0;
  /// z = P^T x over all coordinates.
  virtual void project(std::span<const double> x, std::span<double> z) const = 0;
  /// G = P_b^T P_b, row-major k-by-k.
  virtual void block_gram(BlockRange b, std::span<double> gram) const = 0;
  /// x_b += P_b c, where x_block holds coordinates b.begin .. b.end-1.
  virtual void lift_add(std::span<const double> c, BlockRange b, std::span<double> x_block) const = 0;
  virtual double outer_value(std::span<const double> z) const = 0;
  virtual void outer_gradient(std::span<const double> z, std::span<double> gz) const = 0;
};

/// Objective contract. All methods are const and thread-safe.
class Objective {
 public:
  explicit Objective(ObjectiveSpec spec);
  virtual ~Objective() = default;

  const ObjectiveSpec& spec() const { return spec_; }
  std::size_t dimension() const { return spec_.d; }

  virtual double eval(std::span<const double> x) const = 0;
  /// Writes grad_b f(x) into out (size b.size()).
  virtual void block_gradient_into(std::span<const double> x, BlockRange b, std::span<double> out) const = 0;
  /// Default: central differences of the full gradient with step h.
  virtual void hessian_vector_product_into(std::span<const double> x, std::span<const double> v,
                                           std::span<double> out) const;
  virtual const LowRankStructure* low_rank() const { return nullptr; }

  SparseBlockVector block_gradient(std::span<const double> x, BlockRange b) const;
  std::vector<double> gradient(std::span<const double> x) const;
  std::vector<double> hessian_vector_product(std::span<const double> x, std::span<const double> v) const;

 protected:
  void check_point(std::span<const double> x) const;
  void check_block(BlockRange b) const;

  double fd_step_ = 1e-5;

 private:
  ObjectiveSpec spec_;
};

/// The strict-saddle quartic
///   f(x) = d[(r-1)^4 - (r-1)^2 + (s+1)^2],
///   r = (2/d) sum_{i < d/2} x_i,  s = (2/d) sum_{i >= d/2} x_i.
/// Saddle at (r,s) = (1,-1) with f = 0; minima at r = 1 +- 1/sqrt2, s = -1 with f = -d/4.
///
/// L and rho are computed over the box |r-1| <= box_radius, |s+1| <= box_radius.
class QuarticSaddle final : public Objective, public LowRankStructure {
 public:
  explicit QuarticSaddle(std::size_t d, double box_radius = 1.0);

  double eval(std::span<const double> x) const override;
  void block_gradient_into(std::span<const double> x, BlockRange b, std::span<double> out) const override;
  void hessian_vector_product_into(std::span<const double> x, std::span<const double> v,
                                   std::span<double> out) const override;
  const LowRankStructure* low_rank() const override { return this; }

  std::size_t rank() const override { return 2; }
  void project(std::span<const double> x, std::span<double> z) const override;
  void block_gram(BlockRange b, std::span<double> gram) const override;
  void lift_add(std::span<const double> c, BlockRange b, std::span<double> x_block) const override;
  double outer_value(std::span<const double> z) const override;
  void outer_gradient(std::span<const double> z, std::span<double> gz) const override;

  std::size_t r_count() const { return n_r_; }
  double box_radius() const { return box_radius_; }
  /// A point with (r, s) given: constant on each half.
  std::vector<double> point_at(double r, double s) const;
  std::vector<double> saddle_point() const { return point_at(1.0, -1.0); }
  std::vector<double> minimum_point(bool upper = true) const;
  /// (r, s) of x.
  std::pair<double, double> rs(std::span<const double> x) const;

  static ObjectiveSpec constants(std::size_t d, double box_radius);

 private:
  std::size_t n_r_;
  double box_radius_;
};

/// Exact gradient norm plus a lambda_min estimate from seeded power iteration
/// on (L*I - H), L taken from f.spec(). Requires eps <= L^2/rho.
PointClass classify_point(const Objective& f, std::span<const double> x, double eps, int power_iters,
                          std::uint64_t seed);

using ObjectiveOptions = std::map<std::string, double>;
using ObjectiveFactory = std::function<std::unique_ptr<Objective>(std::size_t d, const ObjectiveOptions&)>;

/// Registers a factory under key; replaces an existing registration.
void register_objective(const std::string& key, ObjectiveFactory factory);
/// Throws ConfigError for unknown keys. "paper_quartic" is always present.
std::unique_ptr<Objective> make_objective(const std::string& key, std::size_t d,
                                          const ObjectiveOptions& options = {});
std::vector<std::string> registered_objectives();

}  // namespace seacgd
