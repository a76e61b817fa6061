#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/entity.hpp"

#include <string>
#include <vector>

namespace repositioner::predict {

struct RankedEntry {
  data::EntityRef entity;
  double score = 0.0;
  bool operator==(const RankedEntry&) const = default;
};

// Scores non-increasing; ties broken by ascending id.
struct RankedList {
  data::EntityRef query;
  std::string model;
  std::vector<RankedEntry> entries;
};

// Top `top_n` candidates by score, skipping those with exclude[i] set.
std::vector<RankedEntry> rank_entities(const std::vector<data::EntityRef>& candidates, const Vector& scores,
                                       std::size_t top_n, const std::vector<bool>* exclude = nullptr);

bool ordering_holds(const std::vector<RankedEntry>& entries);

// Mann-Whitney normalization, ties count one half.
double compute_auroc(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace repositioner::predict
