#pragma once

#include <cstddef>
#include <vector>

#include "seacgd/objective.hpp"

namespace seacgd {

/// W contiguous blocks covering [0, d). Block i belongs to worker i.
struct BlockPartition {
  std::size_t d = 0;
  std::vector<BlockRange> blocks;

  std::size_t W() const { return blocks.size(); }
  const BlockRange& operator[](std::size_t i) const { return blocks[i]; }
  std::size_t block_of(std::size_t coord) const;
};

/// Near-equal contiguous split; when W does not divide d the first d % W
/// blocks get one extra coordinate. Throws ConfigError when W > d or W == 0.
BlockPartition partition_blocks(std::size_t d, std::size_t W);

}  // namespace seacgd
