#pragma once

#include "repositioner/data/entity.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace repositioner::data {

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const Triple&) const = default;
};

struct IndexedTriple {
  std::size_t head = 0;
  std::size_t relation = 0;
  std::size_t tail = 0;

  auto operator<=>(const IndexedTriple&) const = default;
};

struct KgEntity {
  EntityRef ref;
  std::string type;  // raw type label from the metadata file, e.g. "Compound"
};

struct KgLoadOptions {
  // When non-empty, every entity type label must be one of these.
  std::vector<std::string> declared_types;
  std::optional<std::size_t> expected_entities;
  std::optional<std::size_t> expected_triples;
  std::optional<std::size_t> expected_types;
};

class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Entities must be unique by id; triples are deduplicated, first occurrence
  // wins. Throws on dangling endpoints or an empty triple list.
  KnowledgeGraph(std::vector<KgEntity> entities, const std::vector<Triple>& triples);

  std::size_t entity_count() const { return entities_.size(); }
  std::size_t relation_count() const { return relations_.size(); }
  std::size_t triple_count() const { return triples_.size(); }

  const KgEntity& entity(std::size_t index) const { return entities_.at(index); }
  const std::vector<KgEntity>& entities() const { return entities_; }
  const std::string& relation(std::size_t index) const { return relations_.at(index); }
  const std::vector<std::string>& relations() const { return relations_; }
  const std::vector<IndexedTriple>& triples() const { return triples_; }

  std::optional<std::size_t> find_entity(std::string_view id) const;
  std::size_t entity_index(std::string_view id) const;
  std::optional<std::size_t> find_relation(std::string_view name) const;
  std::size_t relation_index(std::string_view name) const;

  bool contains(const IndexedTriple& t) const;
  std::vector<std::size_t> entities_of_kind(EntityKind kind) const;

  std::map<std::string, std::size_t> count_by_type() const;
  std::map<std::string, std::size_t> count_by_relation() const;

  // Triple indices incident to an entity (as head or tail).
  const std::vector<std::size_t>& incident(std::size_t entity) const { return incident_.at(entity); }

  Triple triple(std::size_t index) const;

 private:
  std::vector<KgEntity> entities_;
  std::unordered_map<std::string, std::size_t> entity_index_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, std::size_t> relation_index_;
  std::vector<IndexedTriple> triples_;
  std::vector<std::vector<std::size_t>> incident_;
  std::vector<IndexedTriple> sorted_;  // for membership queries
};

// Triples file: head<TAB>relation<TAB>tail. Metadata: id<TAB>type<TAB>name.
KnowledgeGraph load_knowledge_graph(const std::filesystem::path& triples_path,
                                    const std::filesystem::path& entity_metadata_path,
                                    const KgLoadOptions& options = {});

void write_knowledge_graph(const KnowledgeGraph& kg, const std::filesystem::path& triples_path,
                           const std::filesystem::path& entity_metadata_path);

}  // namespace repositioner::data
