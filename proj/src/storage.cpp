#include "seacgd/storage.hpp"

#include <cmath>

#include "seacgd/errors.hpp"
#include "seacgd/kernels.hpp"

namespace seacgd {

namespace {

class DenseStorage final : public IterateStorage {
 public:
  DenseStorage(const Objective& f, BlockPartition part, std::span<const double> x0)
      : f_(f), part_(std::move(part)), x_(x0.begin(), x0.end()) {
    fx_ = f_.eval(x_);
  }

  StorageKind kind() const override { return StorageKind::Dense; }
  std::size_t dimension() const override { return x_.size(); }

  void snapshot(std::vector<double>& out) const override { out.assign(x_.begin(), x_.end()); }

  void compute_update(std::span<const double> snap, std::size_t block, double eta,
                      std::vector<double>& update) const override {
    const BlockRange b = part_[block];
    update.resize(b.size());
    f_.block_gradient_into(snap, b, update);
    kernels::scale(-eta, update);
  }

  double apply(std::size_t block, std::span<const double> update) override {
    const BlockRange b = part_[block];
    if (update.size() != b.size()) throw ContractViolation("update size does not match its block");
    const double sq = kernels::add_and_squared_norm(update, std::span<double>(x_).subspan(b.begin, b.size()));
    fx_ = f_.eval(x_);
    return sq;
  }

  void update_to_dense(std::size_t, std::span<const double> update, std::span<double> out) const override {
    std::copy(update.begin(), update.end(), out.begin());
  }

  double value() const override { return fx_; }

  double grad_norm() const override { return std::sqrt(kernels::squared_norm(f_.gradient(x_))); }

  std::vector<double> materialize() const override { return x_; }

  void add_dense(std::span<const double> xi) override {
    if (xi.size() != x_.size()) throw ContractViolation("perturbation has the wrong dimension");
    kernels::axpy(1.0, xi, x_);
    fx_ = f_.eval(x_);
  }

 private:
  const Objective& f_;
  BlockPartition part_;
  std::vector<double> x_;
  double fx_;
};

class FactoredStorage final : public IterateStorage {
 public:
  FactoredStorage(const LowRankStructure& lr, BlockPartition part, std::span<const double> x0)
      : lr_(lr), part_(std::move(part)), k_(lr.rank()), base_(x0.begin(), x0.end()) {
    const std::size_t W = part_.W();
    coeff_.assign(W * k_, 0.0);
    gram_.assign(W * k_ * k_, 0.0);
    total_gram_.assign(k_ * k_, 0.0);
    for (std::size_t b = 0; b < W; ++b) {
      lr_.block_gram(part_[b], std::span<double>(gram_).subspan(b * k_ * k_, k_ * k_));
      for (std::size_t i = 0; i < k_ * k_; ++i) total_gram_[i] += gram_[b * k_ * k_ + i];
    }
    z_.assign(k_, 0.0);
    lr_.project(base_, z_);
  }

  StorageKind kind() const override { return StorageKind::Factored; }
  std::size_t dimension() const override { return base_.size(); }

  void snapshot(std::vector<double>& out) const override { out.assign(z_.begin(), z_.end()); }

  void compute_update(std::span<const double> snap, std::size_t, double eta,
                      std::vector<double>& update) const override {
    update.resize(k_);
    lr_.outer_gradient(snap, update);
    for (double& u : update) u *= -eta;
  }

  double apply(std::size_t block, std::span<const double> delta) override {
    if (delta.size() != k_) throw ContractViolation("factored update has the wrong rank");
    const double* g = &gram_[block * k_ * k_];
    double* c = &coeff_[block * k_];
    double sq = 0.0;
    for (std::size_t a = 0; a < k_; ++a) {
      double gd = 0.0;
      for (std::size_t e = 0; e < k_; ++e) gd += g[a * k_ + e] * delta[e];
      z_[a] += gd;
      sq += delta[a] * gd;
      c[a] += delta[a];
    }
    return std::max(sq, 0.0);
  }

  void update_to_dense(std::size_t block, std::span<const double> delta, std::span<double> out) const override {
    std::fill(out.begin(), out.end(), 0.0);
    lr_.lift_add(delta, part_[block], out);
  }

  double value() const override { return lr_.outer_value(z_); }

  double grad_norm() const override {
    std::vector<double> g(k_);
    lr_.outer_gradient(z_, g);
    double acc = 0.0;
    for (std::size_t a = 0; a < k_; ++a)
      for (std::size_t e = 0; e < k_; ++e) acc += g[a] * total_gram_[a * k_ + e] * g[e];
    return std::sqrt(std::max(acc, 0.0));
  }

  std::vector<double> materialize() const override {
    std::vector<double> x = base_;
    for (std::size_t b = 0; b < part_.W(); ++b) {
      const BlockRange r = part_[b];
      lr_.lift_add(std::span<const double>(coeff_).subspan(b * k_, k_), r,
                   std::span<double>(x).subspan(r.begin, r.size()));
    }
    return x;
  }

  void add_dense(std::span<const double> xi) override {
    if (xi.size() != base_.size()) throw ContractViolation("perturbation has the wrong dimension");
    base_ = materialize();
    kernels::axpy(1.0, xi, base_);
    std::fill(coeff_.begin(), coeff_.end(), 0.0);
    lr_.project(base_, z_);
  }

 private:
  const LowRankStructure& lr_;
  BlockPartition part_;
  std::size_t k_;
  std::vector<double> base_;
  std::vector<double> coeff_;
  std::vector<double> gram_;
  std::vector<double> total_gram_;
  std::vector<double> z_;
};

}  // namespace

std::unique_ptr<IterateStorage> make_storage(const Objective& f, const BlockPartition& part,
                                             std::span<const double> x0, StorageKind kind) {
  if (x0.size() != f.dimension()) throw ContractViolation("x0 has the wrong dimension");
  if (part.d != f.dimension()) throw ContractViolation("partition does not match the objective dimension");
  const LowRankStructure* lr = f.low_rank();
  if (kind == StorageKind::Auto) kind = lr ? StorageKind::Factored : StorageKind::Dense;
  if (kind == StorageKind::Factored) {
    if (!lr) throw ConfigError("factored storage needs an objective with a low-rank structure");
    return std::make_unique<FactoredStorage>(*lr, part, x0);
  }
  return std::make_unique<DenseStorage>(f, part, x0);
}

}  // namespace seacgd
