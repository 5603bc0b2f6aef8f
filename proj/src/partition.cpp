#include "seacgd/partition.hpp"

#include <sstream>

#include "seacgd/errors.hpp"

namespace seacgd {

std::size_t BlockPartition::block_of(std::size_t coord) const {
  if (coord >= d) throw ContractViolation("coordinate outside partition");
  std::size_t lo = 0, hi = blocks.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (blocks[mid].begin <= coord) lo = mid;
    else hi = mid;
  }
  return lo;
}

BlockPartition partition_blocks(std::size_t d, std::size_t W) {
  if (W == 0) throw ConfigError("need at least one worker");
  if (W > d) {
    std::ostringstream msg;
    msg << "W=" << W << " workers exceed dimension d=" << d;
    throw ConfigError(msg.str());
  }
  BlockPartition p;
  p.d = d;
  p.blocks.reserve(W);
  const std::size_t base = d / W, extra = d % W;
  std::size_t at = 0;
  for (std::size_t i = 0; i < W; ++i) {
    const std::size_t len = base + (i < extra ? 1 : 0);
    p.blocks.push_back({at, at + len});
    at += len;
  }
  return p;
}

}  // namespace seacgd
