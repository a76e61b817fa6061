#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/knowledge_graph.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"
#include "repositioner/predict/ranking.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace repositioner::kge {

struct RotateConfig {
  Index dim = 64;
  double gamma = 6.0;
  double temperature = 1.0;
  int negatives = 16;
  int epochs = 200;
  std::size_t batch_size = 256;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;

  void validate() const;
};

// Entities are complex vectors (re + i im); each relation is a phase vector,
// so every relation coordinate e^{i theta} has modulus one.
struct RotateModel {
  std::vector<std::string> entity_ids;
  std::vector<std::string> relations;
  Matrix re;     // entities x dim
  Matrix im;     // entities x dim
  Matrix phase;  // relations x dim
  double gamma = 6.0;
  double temperature = 1.0;
  int negatives = 16;

  Index dim() const { return re.cols(); }
  std::size_t entity_index(std::string_view id) const;
  std::size_t relation_index(std::string_view name) const;

  // sum_c |h_c * e^{i theta_c} - t_c|
  double distance(std::size_t head, std::size_t relation, std::size_t tail) const;
  // Distances from every entity as head (resp. tail) with the other slot fixed.
  Vector distances_as_head(std::size_t relation, std::size_t tail) const;
  Vector distances_as_tail(std::size_t head, std::size_t relation) const;

  bool operator==(const RotateModel&) const = default;
};

double rotate_distance(const RotateModel& model, std::string_view head, std::string_view relation,
                       std::string_view tail);

// Negative triples for each training triple: head or tail (fair coin)
// replaced by a uniformly drawn entity, skipping known triples when possible.
std::vector<std::vector<data::IndexedTriple>> sample_negatives(const data::KnowledgeGraph& kg,
                                                               const std::vector<data::IndexedTriple>& triples,
                                                               int per_triple, Rng& rng);

// Self-adversarial loss averaged over `batch`:
//   0.5 * mean[-log sig(gamma - d)] + 0.5 * mean[-sum_j p_j log sig(d'_j - gamma)],
// p = softmax(-temperature * d') held constant for differentiation.
num::Var rotate_batch_loss(num::Tape& tape, const num::BoundParams& bound, const RotateModel& shape,
                           const std::vector<data::IndexedTriple>& batch,
                           const std::vector<std::vector<data::IndexedTriple>>& negatives);

// Same loss evaluated in plain arithmetic.
double rotate_loss(const RotateModel& model, const std::vector<data::IndexedTriple>& triples,
                   const std::vector<std::vector<data::IndexedTriple>>& negatives);

struct RotateResult {
  RotateModel model;
  // Loss over the full training set (fixed negatives) before training, then
  // after each kept epoch; non-increasing.
  std::vector<double> history;
  int rejected_epochs = 0;
};

// Called with the relation phases after every optimizer step.
using RotateStepObserver = std::function<void(const Matrix& phase)>;

// Trains on `train` (defaults to every triple of `kg`).
RotateResult train_rotate(const data::KnowledgeGraph& kg, const RotateConfig& config,
                          const std::vector<data::IndexedTriple>* train = nullptr,
                          const RotateStepObserver& on_step = {});

struct CandidateQuery {
  std::string query;      // entity id
  std::string relation;
  data::EntityKind candidate_kind = data::EntityKind::drug;
  std::size_t top_n = 20;
  bool filter_known = true;
};

// Candidates scored by -distance, with the query placed in the slot its kind
// occupies in the relation's observed (head kind, tail kind) signatures.
predict::RankedList rank_candidates(const RotateModel& model, const data::KnowledgeGraph& kg,
                                    const CandidateQuery& query);

struct HitsReport {
  double hits = 0.0;        // fraction of queries with filtered rank <= k
  double mean_rank = 0.0;
  std::size_t queries = 0;  // two per test triple (head and tail)
};

// Filtered link prediction: each test triple is ranked against every entity in
// the head and tail slot, ignoring corruptions that appear in `known`.
HitsReport filtered_hits_at_k(const RotateModel& model, const std::vector<data::IndexedTriple>& test,
                              const std::vector<data::IndexedTriple>& known, int k);

}  // namespace repositioner::kge
