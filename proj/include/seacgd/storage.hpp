#pragma once

#include <memory>
#include <span>
#include <vector>

#include "seacgd/objective.hpp"
#include "seacgd/partition.hpp"

namespace seacgd {

/// How the server holds the global iterate.
///
/// Dense keeps x itself; snapshots are full copies and each update costs
/// O(|b|) plus an O(d) objective evaluation. Factored needs a LowRankStructure
/// and keeps x = base + sum_b P_b c_b with z = P^T x tracked alongside, so a
/// snapshot is z and an update costs O(k^2).
enum class StorageKind { Auto, Dense, Factored };

class IterateStorage {
 public:
  virtual ~IterateStorage() = default;

  virtual StorageKind kind() const = 0;
  virtual std::size_t dimension() const = 0;
  /// What a worker needs to compute its gradient.
  virtual void snapshot(std::vector<double>& out) const = 0;
  /// Block update from a snapshot, in this storage's update encoding.
  virtual void compute_update(std::span<const double> snap, std::size_t block, double eta,
                              std::vector<double>& update) const = 0;
  /// Applies an update to a block and returns its squared Euclidean norm in R^d.
  virtual double apply(std::size_t block, std::span<const double> update) = 0;
  /// Decodes an update into the coordinates of its block.
  virtual void update_to_dense(std::size_t block, std::span<const double> update,
                               std::span<double> out_block) const = 0;
  virtual double value() const = 0;
  virtual double grad_norm() const = 0;
  virtual std::vector<double> materialize() const = 0;
  /// x += xi over all coordinates.
  virtual void add_dense(std::span<const double> xi) = 0;
};

/// Auto picks Factored when the objective exposes a low-rank structure.
std::unique_ptr<IterateStorage> make_storage(const Objective& f, const BlockPartition& part,
                                             std::span<const double> x0, StorageKind kind = StorageKind::Auto);

}  // namespace seacgd
