#include "repositioner/predict/ranking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repositioner::predict {

namespace {

bool before(const RankedEntry& a, const RankedEntry& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.entity.id < b.entity.id;
}

}  // namespace

std::vector<RankedEntry> rank_entities(const std::vector<data::EntityRef>& candidates, const Vector& scores,
                                       std::size_t top_n, const std::vector<bool>* exclude) {
  require(static_cast<Index>(candidates.size()) == scores.size(), ErrorCode::dimension_mismatch,
          "ranking needs one score per candidate");
  require(!exclude || exclude->size() == candidates.size(), ErrorCode::dimension_mismatch,
          "ranking exclusion mask has the wrong length");
  std::vector<RankedEntry> all;
  all.reserve(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (exclude && (*exclude)[i]) continue;
    const double s = scores(static_cast<Index>(i));
    require(std::isfinite(s), ErrorCode::non_finite, "score for '" + candidates[i].id + "' is not finite");
    all.push_back({candidates[i], s});
  }
  const std::size_t keep = std::min(top_n, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(keep), all.end(), before);
  all.resize(keep);
  return all;
}

bool ordering_holds(const std::vector<RankedEntry>& entries) {
  for (std::size_t i = 1; i < entries.size(); ++i)
    if (before(entries[i], entries[i - 1])) return false;
  return true;
}

double compute_auroc(const std::vector<double>& scores, const std::vector<int>& labels) {
  require(scores.size() == labels.size(), ErrorCode::dimension_mismatch, "AUROC needs one label per score");
  for (double s : scores) require(std::isfinite(s), ErrorCode::non_finite, "AUROC scores must be finite");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups.
  double positive_rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t start = 0; start < order.size();) {
    std::size_t end = start;
    while (end < order.size() && scores[order[end]] == scores[order[start]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(start + 1 + end);
    for (std::size_t k = start; k < end; ++k)
      if (labels[order[k]] != 0) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    start = end;
  }
  const std::size_t negatives = scores.size() - positives;
  require(positives > 0 && negatives > 0, ErrorCode::invalid_argument, "AUROC needs both classes");
  const double p = static_cast<double>(positives), n = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1) / 2) / (p * n);
}

}  // namespace repositioner::predict
