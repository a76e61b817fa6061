#include "repositioner/data/entity.hpp"

#include "repositioner/common.hpp"

#include <algorithm>
#include <cctype>

namespace repositioner::data {

std::string_view to_string(EntityKind kind) {
  switch (kind) {
    case EntityKind::drug: return "drug";
    case EntityKind::disease: return "disease";
    case EntityKind::target: return "target";
    case EntityKind::side_effect: return "side-effect";
    case EntityKind::pathway: return "pathway";
    case EntityKind::other: return "other";
  }
  return "other";
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

EntityKind parse_entity_kind(std::string_view label, bool strict) {
  std::string key;
  for (char c : to_lower(label))
    if (c != ' ' && c != '-' && c != '_') key.push_back(c);
  if (key == "drug" || key == "compound") return EntityKind::drug;
  if (key == "disease") return EntityKind::disease;
  if (key == "target" || key == "gene" || key == "protein") return EntityKind::target;
  if (key == "sideeffect") return EntityKind::side_effect;
  if (key == "pathway") return EntityKind::pathway;
  if (key == "other") return EntityKind::other;
  if (strict) fail(ErrorCode::parse, "unknown entity kind '" + std::string(label) + "'");
  return EntityKind::other;
}

std::size_t Vocabulary::add(std::string_view id, std::string_view name) {
  require(!id.empty(), ErrorCode::validation, "empty entity id");
  std::string key(id);
  if (auto it = index_.find(key); it != index_.end()) {
    std::string& current = names_[it->second];
    if (!name.empty() && (current.empty() || current == key)) current = std::string(name);
    return it->second;
  }
  const std::size_t index = ids_.size();
  ids_.push_back(key);
  names_.emplace_back(name.empty() ? key : std::string(name));
  index_.emplace(std::move(key), index);
  return index;
}

std::optional<std::size_t> Vocabulary::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Vocabulary::index_of(std::string_view id) const {
  auto found = find(id);
  if (!found)
    fail(ErrorCode::not_found,
         "unknown " + std::string(to_string(kind_)) + " id '" + std::string(id) + "'");
  return *found;
}

void EntityDirectory::add(EntityKind kind, std::string_view id, std::string_view name) {
  auto [it, inserted] = by_kind_.try_emplace(kind, kind);
  it->second.add(id, name);
}

const Vocabulary& EntityDirectory::of(EntityKind kind) const {
  static const std::map<EntityKind, Vocabulary> empty_vocabs = [] {
    std::map<EntityKind, Vocabulary> m;
    for (auto k : {EntityKind::drug, EntityKind::disease, EntityKind::target,
                   EntityKind::side_effect, EntityKind::pathway, EntityKind::other})
      m.emplace(k, Vocabulary(k));
    return m;
  }();
  auto it = by_kind_.find(kind);
  return it == by_kind_.end() ? empty_vocabs.at(kind) : it->second;
}

bool EntityDirectory::contains(EntityKind kind, std::string_view id) const {
  return of(kind).contains(id);
}

std::vector<EntityKind> EntityDirectory::kinds() const {
  std::vector<EntityKind> out;
  for (const auto& [kind, vocab] : by_kind_) out.push_back(kind);
  return out;
}

EntityRef resolve_entity(const EntityDirectory& directory, std::string_view query, EntityKind kind) {
  require(!query.empty(), ErrorCode::invalid_argument, "empty entity query");
  const Vocabulary& vocab = directory.of(kind);
  if (auto exact = vocab.find(query)) return vocab.ref(*exact);

  const std::string needle = to_lower(query);
  std::vector<std::size_t> matches;
  for (std::size_t i = 0; i < vocab.size(); ++i)
    if (to_lower(vocab.name(i)) == needle) matches.push_back(i);

  if (matches.empty())
    fail(ErrorCode::not_found,
         "no " + std::string(to_string(kind)) + " matches '" + std::string(query) + "'");
  if (matches.size() > 1) {
    std::vector<std::string> candidates;
    for (auto i : matches) candidates.push_back(vocab.id(i));
    throw AmbiguousNameError("name '" + std::string(query) + "' matches " +
                                 std::to_string(matches.size()) + " " +
                                 std::string(to_string(kind)) + " entities",
                             std::move(candidates));
  }
  return vocab.ref(matches.front());
}

}  // namespace repositioner::data
