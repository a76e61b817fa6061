#pragma once

#include "repositioner/data/entity.hpp"
#include "repositioner/data/key_value.hpp"
#include "repositioner/data/knowledge_graph.hpp"
#include "repositioner/data/network.hpp"
#include "repositioner/data/tables.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace repositioner::data {

// Everything the platform ingests, loaded from one key=value manifest.
// Immutable after load; safe to share across readers.
struct Dataset {
  LayeredNetworkSet networks;
  std::optional<KnowledgeGraph> kg;
  std::map<EntityKind, FeatureTable> features;
  std::vector<DrugRecord> drug_records;
  std::vector<MoleculeGraph> molecules;
  std::vector<ProteinSequence> proteins;
  std::vector<LabeledPair> dti_pairs;
  std::vector<LabeledPair> cpi_pairs;
  EntityDirectory directory;
  std::string fingerprint;

  const DrugRecord* find_drug_record(std::string_view id) const;
  const MoleculeGraph* find_molecule(std::string_view id) const;
  const ProteinSequence* find_protein(std::string_view id) const;
  const FeatureTable* find_features(EntityKind kind) const;
};

// Summary counts printed by `ingest`; key order is stable.
std::map<std::string, std::size_t> dataset_counts(const Dataset& dataset);

// Manifest keys (paths relative to the manifest):
//   vocab.<kind>, layer.<name>[.rows|.cols|.symmetric]   network layers
//   kg.triples, kg.entities, kg.entity_types (comma list),
//   kg.expected_entities, kg.expected_triples, kg.expected_types
//   features.<kind>, drugs.records, molecules, proteins, pairs.dti, pairs.cpi
Dataset load_dataset(const std::filesystem::path& manifest_path);

// Content hash over every vocabulary in index order.
std::string vocabulary_fingerprint(const Dataset& dataset);

}  // namespace repositioner::data
