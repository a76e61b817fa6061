#pragma once

#include "repositioner/data/knowledge_graph.hpp"
#include "repositioner/data/network.hpp"
#include "repositioner/predict/ranking.hpp"

#include <string>
#include <utility>
#include <vector>

namespace repositioner::kge {

struct ExplanationEdge {
  std::string head;
  std::string relation;
  std::string tail;
  std::size_t triple = 0;  // index in the source graph

  bool operator==(const ExplanationEdge&) const = default;
};

struct PathStep {
  std::size_t edge = 0;  // index into ExplanationSubgraph::edges
  bool forward = true;   // traversed head -> tail

  bool operator==(const PathStep&) const = default;
};

struct ExplanationSubgraph {
  std::vector<data::EntityRef> nodes;
  std::vector<ExplanationEdge> edges;
  std::vector<std::vector<PathStep>> paths;

  bool empty() const { return paths.empty(); }
  bool operator==(const ExplanationSubgraph&) const = default;
};

// Simple paths from `drug` to `entity` of at most `max_hops` edges, edges
// walked in either direction. Keeps the `max_paths` shortest, ties ordered by
// the sequence of source triple indices. Nodes appear in first-visit order,
// edges in triple order.
ExplanationSubgraph extract_paths(const data::KnowledgeGraph& kg, std::string_view drug, std::string_view entity,
                                  int max_hops, int max_paths);

inline const std::vector<std::string> kSimilarityLayers = {"therapeutic", "chemical", "go-bp", "go-cc", "go-mf"};

using SimilarityMap = std::vector<std::pair<std::string, std::vector<predict::RankedEntry>>>;

// Per layer, the `top` heaviest neighbours of `drug` (itself excluded).
SimilarityMap top_similar_drugs(const data::LayeredNetworkSet& layers, std::string_view drug, std::size_t top = 20,
                                const std::vector<std::string>& layer_names = kSimilarityLayers);

}  // namespace repositioner::kge
