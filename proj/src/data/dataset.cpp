#include "repositioner/data/dataset.hpp"

#include "repositioner/hash.hpp"
#include "text_io.hpp"

#include <sstream>

namespace repositioner::data {

const DrugRecord* Dataset::find_drug_record(std::string_view id) const {
  for (const auto& r : drug_records)
    if (r.drug_id == id) return &r;
  return nullptr;
}

const MoleculeGraph* Dataset::find_molecule(std::string_view id) const {
  for (const auto& m : molecules)
    if (m.id == id) return &m;
  return nullptr;
}

const ProteinSequence* Dataset::find_protein(std::string_view id) const {
  for (const auto& p : proteins)
    if (p.id == id) return &p;
  return nullptr;
}

const FeatureTable* Dataset::find_features(EntityKind kind) const {
  auto it = features.find(kind);
  return it == features.end() ? nullptr : &it->second;
}

std::map<std::string, std::size_t> dataset_counts(const Dataset& dataset) {
  std::map<std::string, std::size_t> out;
  for (const auto& [kind, vocab] : dataset.networks.vocabs())
    out["network." + std::string(to_string(kind))] = vocab.size();
  out["network.layers"] = dataset.networks.layers().size();
  for (const auto& layer : dataset.networks.layers())
    out["layer." + layer.name + ".nonzeros"] = static_cast<std::size_t>(layer.adjacency.nonZeros());
  if (dataset.kg) {
    out["kg.entities"] = dataset.kg->entity_count();
    out["kg.relations"] = dataset.kg->relation_count();
    out["kg.triples"] = dataset.kg->triple_count();
    out["kg.entity_types"] = dataset.kg->count_by_type().size();
  }
  for (const auto& [kind, table] : dataset.features)
    out["features." + std::string(to_string(kind))] = table.size();
  out["drug_records"] = dataset.drug_records.size();
  out["molecules"] = dataset.molecules.size();
  out["proteins"] = dataset.proteins.size();
  out["pairs.dti"] = dataset.dti_pairs.size();
  out["pairs.cpi"] = dataset.cpi_pairs.size();
  return out;
}

std::string vocabulary_fingerprint(const Dataset& dataset) {
  std::ostringstream canon;
  for (const auto& [kind, vocab] : dataset.networks.vocabs()) {
    canon << "network:" << to_string(kind) << '\n';
    for (const auto& id : vocab.ids()) canon << id << '\n';
  }
  if (dataset.kg) {
    canon << "kg-entities\n";
    for (const auto& e : dataset.kg->entities()) canon << e.ref.id << '\t' << e.type << '\n';
    canon << "kg-relations\n";
    for (const auto& r : dataset.kg->relations()) canon << r << '\n';
  }
  for (const auto& [kind, table] : dataset.features) {
    canon << "features:" << to_string(kind) << '\n';
    for (const auto& id : table.ids()) canon << id << '\n';
  }
  return sha256_hex(canon.str());
}

Dataset load_dataset(const std::filesystem::path& manifest_path) {
  const KeyValueFile manifest = KeyValueFile::load(manifest_path);
  Dataset ds;
  ds.networks = load_network_layers(manifest);
  for (const auto& [kind, vocab] : ds.networks.vocabs())
    for (std::size_t i = 0; i < vocab.size(); ++i) ds.directory.add(kind, vocab.id(i), vocab.name(i));

  if (auto triples = manifest.get("kg.triples")) {
    KgLoadOptions options;
    if (auto types = manifest.get("kg.entity_types"))
      for (auto& t : detail::split(*types, ','))
        if (auto trimmed = detail::trim(t); !trimmed.empty()) options.declared_types.emplace_back(trimmed);
    if (manifest.contains("kg.expected_entities"))
      options.expected_entities = static_cast<std::size_t>(manifest.get_int("kg.expected_entities", 0));
    if (manifest.contains("kg.expected_triples"))
      options.expected_triples = static_cast<std::size_t>(manifest.get_int("kg.expected_triples", 0));
    if (manifest.contains("kg.expected_types"))
      options.expected_types = static_cast<std::size_t>(manifest.get_int("kg.expected_types", 0));
    ds.kg = load_knowledge_graph(manifest.resolve_path(*triples),
                                 manifest.resolve_path(manifest.require("kg.entities")), options);
    for (const auto& e : ds.kg->entities()) ds.directory.add(e.ref.kind, e.ref.id, e.ref.name);
  }

  const IdResolver resolve = [&ds](EntityKind kind, std::string_view id) {
    return ds.directory.contains(kind, id);
  };
  for (const auto& [key, value] : manifest.with_prefix("features.")) {
    const EntityKind kind = parse_entity_kind(key.substr(9), true);
    ds.features.insert_or_assign(kind, load_feature_table(manifest.resolve_path(value), kind, resolve));
  }
  if (auto p = manifest.get("drugs.records")) ds.drug_records = load_drug_records(manifest.resolve_path(*p), resolve);
  if (auto p = manifest.get("molecules")) ds.molecules = load_molecules(manifest.resolve_path(*p), resolve);
  if (auto p = manifest.get("proteins")) ds.proteins = load_proteins(manifest.resolve_path(*p), resolve);
  if (auto p = manifest.get("pairs.dti")) ds.dti_pairs = load_pairs(manifest.resolve_path(*p));
  if (auto p = manifest.get("pairs.cpi")) ds.cpi_pairs = load_pairs(manifest.resolve_path(*p));

  for (const auto& pair : ds.dti_pairs) {
    require(resolve(EntityKind::drug, pair.first), ErrorCode::validation,
            "DTI pair drug '" + pair.first + "' does not resolve");
    require(resolve(EntityKind::target, pair.second), ErrorCode::validation,
            "DTI pair target '" + pair.second + "' does not resolve");
  }
  for (const auto& pair : ds.cpi_pairs) {
    require(ds.find_molecule(pair.first) != nullptr, ErrorCode::validation,
            "CPI pair compound '" + pair.first + "' has no molecule graph");
    require(ds.find_protein(pair.second) != nullptr, ErrorCode::validation,
            "CPI pair protein '" + pair.second + "' has no sequence");
  }
  ds.fingerprint = vocabulary_fingerprint(ds);
  return ds;
}

}  // namespace repositioner::data
