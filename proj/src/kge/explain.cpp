#include "repositioner/kge/explain.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <map>

namespace repositioner::kge {

namespace {

struct Partial {
  std::vector<std::size_t> nodes;
  std::vector<std::size_t> triples;
};

std::size_t other_end(const data::IndexedTriple& t, std::size_t from) { return t.head == from ? t.tail : t.head; }

}  // namespace

ExplanationSubgraph extract_paths(const data::KnowledgeGraph& kg, std::string_view drug, std::string_view entity,
                                  int max_hops, int max_paths) {
  require(max_hops >= 1, ErrorCode::invalid_argument, "max hops must be at least 1");
  require(max_paths >= 1, ErrorCode::invalid_argument, "max paths must be at least 1");
  const std::size_t source = kg.entity_index(drug);
  const std::size_t goal = kg.entity_index(entity);
  ExplanationSubgraph out;
  if (source == goal) return out;

  // Hop distance to the goal prunes branches that cannot arrive in time.
  constexpr std::size_t kFar = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> to_goal(kg.entity_count(), kFar);
  std::deque<std::size_t> queue{goal};
  to_goal[goal] = 0;
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    if (to_goal[u] >= static_cast<std::size_t>(max_hops)) continue;
    for (std::size_t ti : kg.incident(u)) {
      const std::size_t v = other_end(kg.triples()[ti], u);
      if (to_goal[v] == kFar) {
        to_goal[v] = to_goal[u] + 1;
        queue.push_back(v);
      }
    }
  }

  std::vector<Partial> found;
  std::vector<Partial> frontier{{{source}, {}}};
  for (int hop = 1; hop <= max_hops && !frontier.empty(); ++hop) {
    std::vector<Partial> next, done;
    for (const auto& p : frontier) {
      const std::size_t u = p.nodes.back();
      for (std::size_t ti : kg.incident(u)) {
        const auto& t = kg.triples()[ti];
        if (t.head == t.tail) continue;
        const std::size_t v = other_end(t, u);
        if (to_goal[v] == kFar || static_cast<std::size_t>(hop) + to_goal[v] > static_cast<std::size_t>(max_hops))
          continue;
        if (std::find(p.nodes.begin(), p.nodes.end(), v) != p.nodes.end()) continue;
        Partial q = p;
        q.nodes.push_back(v);
        q.triples.push_back(ti);
        (v == goal ? done : next).push_back(std::move(q));
      }
    }
    std::sort(done.begin(), done.end(), [](const Partial& a, const Partial& b) { return a.triples < b.triples; });
    for (auto& p : done) {
      if (found.size() == static_cast<std::size_t>(max_paths)) break;
      found.push_back(std::move(p));
    }
    if (found.size() == static_cast<std::size_t>(max_paths)) break;
    frontier = std::move(next);
  }

  std::vector<std::size_t> used;
  for (const auto& p : found) used.insert(used.end(), p.triples.begin(), p.triples.end());
  std::sort(used.begin(), used.end());
  used.erase(std::unique(used.begin(), used.end()), used.end());
  std::map<std::size_t, std::size_t> edge_slot;
  for (std::size_t ti : used) {
    const data::Triple t = kg.triple(ti);
    edge_slot[ti] = out.edges.size();
    out.edges.push_back({t.head, t.relation, t.tail, ti});
  }
  std::vector<bool> listed(kg.entity_count(), false);
  for (const auto& p : found) {
    for (std::size_t v : p.nodes)
      if (!listed[v]) {
        listed[v] = true;
        out.nodes.push_back(kg.entity(v).ref);
      }
    std::vector<PathStep> steps;
    for (std::size_t k = 0; k < p.triples.size(); ++k)
      steps.push_back({edge_slot.at(p.triples[k]), kg.triples()[p.triples[k]].head == p.nodes[k]});
    out.paths.push_back(std::move(steps));
  }
  return out;
}

SimilarityMap top_similar_drugs(const data::LayeredNetworkSet& layers, std::string_view drug, std::size_t top,
                                const std::vector<std::string>& layer_names) {
  const data::Vocabulary& drugs = layers.vocab(data::EntityKind::drug);
  const auto row = static_cast<Index>(drugs.index_of(drug));
  SimilarityMap out;
  for (const auto& name : layer_names) {
    require(layers.has_layer(name), ErrorCode::not_found, "similarity layer '" + name + "' is not loaded");
    const data::NetworkLayer& layer = layers.layer(name);
    require(layer.row_kind == data::EntityKind::drug && layer.col_kind == data::EntityKind::drug,
            ErrorCode::validation, "similarity layer '" + name + "' is not drug-by-drug");
    std::vector<data::EntityRef> neighbours;
    std::vector<double> weights;
    for (data::SparseMatrix::InnerIterator it(layer.adjacency, row); it; ++it) {
      if (it.col() == row || it.value() <= 0.0) continue;
      neighbours.push_back(drugs.ref(static_cast<std::size_t>(it.col())));
      weights.push_back(it.value());
    }
    const Vector scores = Eigen::Map<const Vector>(weights.data(), static_cast<Index>(weights.size()));
    out.emplace_back(name, predict::rank_entities(neighbours, scores, top));
  }
  return out;
}

}  // namespace repositioner::kge
