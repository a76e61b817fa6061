#pragma once

#include "repositioner/data/knowledge_graph.hpp"
#include "repositioner/data/tables.hpp"
#include "repositioner/mtl/encoders.hpp"
#include "repositioner/predict/ranking.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace repositioner::mtl {

enum class Tasks { both, dti_only, cpi_only };

struct KgMtlConfig {
  Index dim = 64;
  int rgcn_layers = 3;
  int gcn_layers = 2;
  ProteinEncoderShape protein;
  Index head_hidden = 64;
  bool shared_unit = true;
  int shared_after_layer = 1;  // unit sits between RGCN layers l and l+1
  Tasks tasks = Tasks::both;
  int hops = 2;
  std::size_t node_budget = 500;
  int epochs = 100;
  std::size_t batch_size = 64;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Entities within `hops` of the seeds (seeds first, then breadth-first in
// graph index order), capped at `budget`, with every triple among them.
struct KgSubgraph {
  std::vector<std::size_t> entities;  // kg indices, local order
  RelationalGraph graph;
};
KgSubgraph extract_subgraph(const data::KnowledgeGraph& kg, const std::vector<std::size_t>& seeds, int hops,
                            std::size_t budget);
// The listed entities, in the given order, with every triple among them.
KgSubgraph induced_subgraph(const data::KnowledgeGraph& kg, const std::vector<std::size_t>& entities);

struct KgMtlModel {
  KgMtlConfig config;
  num::ParamSet params;
  std::vector<data::EntityRef> entities;  // subgraph entities, local order
  RelationalGraph graph;
  std::map<std::string, data::MoleculeGraph> molecules;  // keyed by drug/compound id
  std::map<std::string, data::ProteinSequence> proteins;

  std::size_t local_index(std::string_view id) const;
  bool has_entity(std::string_view id) const;

  // Final RGCN embeddings (shared unit applied when enabled).
  Matrix entity_embeddings() const;
  double predict_dti(std::string_view drug, std::string_view target) const;
  // Probability for every listed drug against one target, one forward pass.
  Vector dti_scores(const std::vector<std::string>& drugs, std::string_view target) const;
  double predict_cpi(std::string_view compound, std::string_view protein) const;
};

struct KgMtlResult {
  KgMtlModel model;
  // Mean logistic loss over every pair of the task: before training, then
  // after each kept epoch. Empty for a disabled task.
  std::vector<double> dti_history;
  std::vector<double> cpi_history;
  int rejected_epochs = 0;
};

KgMtlResult train_kg_mtl(const data::KnowledgeGraph& kg, const std::vector<data::LabeledPair>& dti,
                         const std::vector<data::LabeledPair>& cpi, const std::vector<data::MoleculeGraph>& molecules,
                         const std::vector<data::ProteinSequence>& proteins, const KgMtlConfig& config);

// Drugs of the model's subgraph ranked by predicted interaction with `target`.
std::vector<predict::RankedEntry> rank_drugs_for_target(const KgMtlModel& model, std::string_view target,
                                                        std::size_t top_n,
                                                        const std::vector<std::string>* exclude = nullptr);

}  // namespace repositioner::mtl
