#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace repositioner::data {

enum class EntityKind { drug, disease, target, side_effect, pathway, other };

std::string_view to_string(EntityKind kind);

// Accepts canonical kind names plus the common knowledge-graph type labels
// ("Compound", "Gene", "Side Effect", ...). Unknown labels map to `other`
// unless `strict` is set, in which case they raise a parse error.
EntityKind parse_entity_kind(std::string_view label, bool strict = false);

struct EntityRef {
  std::string id;
  std::string name;
  EntityKind kind = EntityKind::other;

  bool operator==(const EntityRef&) const = default;
};

// Ordered id <-> index mapping for one entity kind. Index order is the order
// of first insertion and fixes every downstream matrix row order.
class Vocabulary {
 public:
  explicit Vocabulary(EntityKind kind = EntityKind::other) : kind_(kind) {}

  // Returns the index of `id`, inserting it if new. A non-empty name replaces
  // a placeholder name (empty or equal to the id).
  std::size_t add(std::string_view id, std::string_view name = {});

  std::optional<std::size_t> find(std::string_view id) const;
  std::size_t index_of(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id).has_value(); }

  const std::string& id(std::size_t index) const { return ids_.at(index); }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  EntityRef ref(std::size_t index) const { return {ids_.at(index), names_.at(index), kind_}; }

  std::size_t size() const { return ids_.size(); }
  EntityKind kind() const { return kind_; }
  const std::vector<std::string>& ids() const { return ids_; }

  bool operator==(const Vocabulary& other) const {
    return kind_ == other.kind_ && ids_ == other.ids_ && names_ == other.names_;
  }

 private:
  EntityKind kind_;
  std::vector<std::string> ids_;
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Merged per-kind view of every entity the platform knows about, used for
// query resolution and entity listings.
class EntityDirectory {
 public:
  void add(EntityKind kind, std::string_view id, std::string_view name = {});

  const Vocabulary& of(EntityKind kind) const;
  bool contains(EntityKind kind, std::string_view id) const;
  std::vector<EntityKind> kinds() const;

 private:
  std::map<EntityKind, Vocabulary> by_kind_;
};

// Exact (case-sensitive) id match wins; otherwise a unique case-insensitive
// name match. Throws not_found or AmbiguousNameError.
EntityRef resolve_entity(const EntityDirectory& directory, std::string_view query, EntityKind kind);

std::string to_lower(std::string_view s);

}  // namespace repositioner::data
