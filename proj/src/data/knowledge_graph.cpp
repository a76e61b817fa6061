#include "repositioner/data/knowledge_graph.hpp"

#include "repositioner/common.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace repositioner::data {

KnowledgeGraph::KnowledgeGraph(std::vector<KgEntity> entities, const std::vector<Triple>& triples)
    : entities_(std::move(entities)) {
  for (std::size_t i = 0; i < entities_.size(); ++i) {
    auto [it, inserted] = entity_index_.emplace(entities_[i].ref.id, i);
    require(inserted, ErrorCode::validation, "duplicate entity id '" + entities_[i].ref.id + "'");
  }
  require(!triples.empty(), ErrorCode::validation, "knowledge graph has no triples");

  std::set<IndexedTriple> seen;
  for (const auto& t : triples) {
    auto h = find_entity(t.head);
    auto tl = find_entity(t.tail);
    if (!h) fail(ErrorCode::validation, "triple head '" + t.head + "' has no entity metadata");
    if (!tl) fail(ErrorCode::validation, "triple tail '" + t.tail + "' has no entity metadata");
    auto [rit, rnew] = relation_index_.emplace(t.relation, relations_.size());
    if (rnew) relations_.push_back(t.relation);
    IndexedTriple it{*h, rit->second, *tl};
    if (seen.insert(it).second) triples_.push_back(it);
  }
  sorted_.assign(seen.begin(), seen.end());

  incident_.assign(entities_.size(), {});
  for (std::size_t i = 0; i < triples_.size(); ++i) {
    incident_[triples_[i].head].push_back(i);
    if (triples_[i].tail != triples_[i].head) incident_[triples_[i].tail].push_back(i);
  }
}

std::optional<std::size_t> KnowledgeGraph::find_entity(std::string_view id) const {
  auto it = entity_index_.find(std::string(id));
  if (it == entity_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeGraph::entity_index(std::string_view id) const {
  auto found = find_entity(id);
  if (!found) fail(ErrorCode::not_found, "unknown knowledge-graph entity '" + std::string(id) + "'");
  return *found;
}

std::optional<std::size_t> KnowledgeGraph::find_relation(std::string_view name) const {
  auto it = relation_index_.find(std::string(name));
  if (it == relation_index_.end()) return std::nullopt;
  return it->second;
}

std::size_t KnowledgeGraph::relation_index(std::string_view name) const {
  auto found = find_relation(name);
  if (!found) fail(ErrorCode::not_found, "unknown relation '" + std::string(name) + "'");
  return *found;
}

bool KnowledgeGraph::contains(const IndexedTriple& t) const {
  return std::binary_search(sorted_.begin(), sorted_.end(), t);
}

std::vector<std::size_t> KnowledgeGraph::entities_of_kind(EntityKind kind) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < entities_.size(); ++i)
    if (entities_[i].ref.kind == kind) out.push_back(i);
  return out;
}

std::map<std::string, std::size_t> KnowledgeGraph::count_by_type() const {
  std::map<std::string, std::size_t> out;
  for (const auto& e : entities_) ++out[e.type];
  return out;
}

std::map<std::string, std::size_t> KnowledgeGraph::count_by_relation() const {
  std::map<std::string, std::size_t> out;
  for (const auto& t : triples_) ++out[relations_[t.relation]];
  return out;
}

Triple KnowledgeGraph::triple(std::size_t index) const {
  const auto& t = triples_.at(index);
  return {entities_[t.head].ref.id, relations_[t.relation], entities_[t.tail].ref.id};
}

KnowledgeGraph load_knowledge_graph(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& entity_metadata_path,
                                    const KgLoadOptions& options) {
  std::vector<KgEntity> entities;
  std::set<std::string> ids;
  std::set<std::string> types;
  for (const auto& row : detail::read_tsv(entity_metadata_path)) {
    const std::string where = entity_metadata_path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 3, ErrorCode::parse, where + ": expected id<TAB>type<TAB>name");
    const std::string& type = row.fields[1];
    if (!options.declared_types.empty())
      require(std::find(options.declared_types.begin(), options.declared_types.end(), type) !=
                  options.declared_types.end(),
              ErrorCode::validation,
              where + ": entity type '" + type + "' is not among the " +
                  std::to_string(options.declared_types.size()) + " declared types");
    require(ids.insert(row.fields[0]).second, ErrorCode::validation,
            where + ": duplicate entity id '" + row.fields[0] + "'");
    types.insert(type);
    entities.push_back({{row.fields[0], row.fields[2], parse_entity_kind(type)}, type});
  }

  std::vector<Triple> triples;
  for (const auto& row : detail::read_tsv(triples_path)) {
    const std::string where = triples_path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 3, ErrorCode::parse,
            where + ": expected head<TAB>relation<TAB>tail, got " + std::to_string(row.fields.size()) +
                " columns");
    triples.push_back({row.fields[0], row.fields[1], row.fields[2]});
  }

  KnowledgeGraph kg(std::move(entities), triples);
  if (options.expected_entities)
    require(kg.entity_count() == *options.expected_entities, ErrorCode::validation,
            "entity count " + std::to_string(kg.entity_count()) + " != declared " +
                std::to_string(*options.expected_entities));
  if (options.expected_triples)
    require(kg.triple_count() == *options.expected_triples, ErrorCode::validation,
            "triple count " + std::to_string(kg.triple_count()) + " != declared " +
                std::to_string(*options.expected_triples));
  if (options.expected_types)
    require(types.size() == *options.expected_types, ErrorCode::validation,
            "entity type count " + std::to_string(types.size()) + " != declared " +
                std::to_string(*options.expected_types));
  return kg;
}

void write_knowledge_graph(const KnowledgeGraph& kg, const std::filesystem::path& triples_path,
                           const std::filesystem::path& entity_metadata_path) {
  std::ostringstream meta;
  for (const auto& e : kg.entities()) meta << e.ref.id << '\t' << e.type << '\t' << e.ref.name << '\n';
  detail::write_file(entity_metadata_path, meta.str());
  std::ostringstream triples;
  for (std::size_t i = 0; i < kg.triple_count(); ++i) {
    const Triple t = kg.triple(i);
    triples << t.head << '\t' << t.relation << '\t' << t.tail << '\n';
  }
  detail::write_file(triples_path, triples.str());
}

}  // namespace repositioner::data
