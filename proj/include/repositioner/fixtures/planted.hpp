#pragma once

#include "repositioner/common.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace repositioner::fixtures {

// Drug-by-disease matrix with drugs and diseases split into blocks; drugs of
// block b associate with diseases of block b with probability `density`.
struct PlantedBlocks {
  Matrix y;
  Matrix x;  // drug features: block indicator plus noise
  std::vector<int> drug_block;
  std::vector<int> disease_block;
};
PlantedBlocks planted_blocks(Index drugs, Index diseases, int blocks, double density, std::uint64_t seed);

// Binary rank-2 interactions: two disjoint bicliques. Each row and column
// joins group 0 or 1 with probability `membership` apiece; a cell is a true
// interaction when both ends share a group. `observed_fraction` of the true
// interactions are revealed.
struct PlantedLowRank {
  Matrix truth;     // binary
  Matrix observed;  // binary, subset of truth
  std::vector<std::pair<Index, Index>> held_out_positives;
  std::vector<std::pair<Index, Index>> sampled_negatives;  // as many as held-out positives
};
PlantedLowRank planted_rank2(Index rows, Index cols, double membership, double observed_fraction,
                             std::uint64_t seed);

}  // namespace repositioner::fixtures
