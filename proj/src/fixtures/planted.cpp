#include "repositioner/fixtures/planted.hpp"

#include <algorithm>
#include <numeric>

namespace repositioner::fixtures {

PlantedBlocks planted_blocks(Index drugs, Index diseases, int blocks, double density, std::uint64_t seed) {
  Rng rng = make_rng(seed, "fixture.blocks");
  std::bernoulli_distribution link(density);
  PlantedBlocks out;
  out.y = Matrix::Zero(drugs, diseases);
  for (Index i = 0; i < drugs; ++i) out.drug_block.push_back(static_cast<int>(i * blocks / drugs));
  for (Index j = 0; j < diseases; ++j) out.disease_block.push_back(static_cast<int>(j * blocks / diseases));
  for (Index i = 0; i < drugs; ++i) {
    bool any = false;
    for (Index j = 0; j < diseases; ++j)
      if (out.drug_block[static_cast<std::size_t>(i)] == out.disease_block[static_cast<std::size_t>(j)] && link(rng)) {
        out.y(i, j) = 1.0;
        any = true;
      }
    if (!any) {
      // Every drug keeps at least one association inside its block.
      for (Index j = 0; j < diseases; ++j)
        if (out.disease_block[static_cast<std::size_t>(j)] == out.drug_block[static_cast<std::size_t>(i)]) {
          out.y(i, j) = 1.0;
          break;
        }
    }
  }
  const Index f = blocks + 4;
  out.x = random_normal(drugs, f, 0.1, rng);
  for (Index i = 0; i < drugs; ++i) out.x(i, out.drug_block[static_cast<std::size_t>(i)]) += 1.0;
  return out;
}

PlantedLowRank planted_rank2(Index rows, Index cols, double membership, double observed_fraction,
                             std::uint64_t seed) {
  Rng rng = make_rng(seed, "fixture.rank2");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw_groups = [&](Index n) {
    std::vector<int> g;
    for (Index i = 0; i < n; ++i) {
      const double u = unit(rng);
      g.push_back(u < membership ? 0 : (u < 2 * membership ? 1 : -1));
    }
    return g;
  };
  const std::vector<int> row_group = draw_groups(rows), col_group = draw_groups(cols);

  PlantedLowRank out;
  out.truth = Matrix::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      const int g = row_group[static_cast<std::size_t>(i)];
      if (g >= 0 && g == col_group[static_cast<std::size_t>(j)]) out.truth(i, j) = 1.0;
    }
  out.observed = Matrix::Zero(rows, cols);
  std::vector<std::pair<Index, Index>> positives, negatives;
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) (out.truth(i, j) != 0.0 ? positives : negatives).emplace_back(i, j);
  std::shuffle(positives.begin(), positives.end(), rng);
  const auto observed = static_cast<std::size_t>(observed_fraction * static_cast<double>(positives.size()));
  for (std::size_t k = 0; k < positives.size(); ++k) {
    if (k < observed) {
      out.observed(positives[k].first, positives[k].second) = 1.0;
    } else {
      out.held_out_positives.push_back(positives[k]);
    }
  }
  std::shuffle(negatives.begin(), negatives.end(), rng);
  negatives.resize(std::min(negatives.size(), out.held_out_positives.size()));
  out.sampled_negatives = std::move(negatives);
  return out;
}

}  // namespace repositioner::fixtures
