#pragma once

#include "repositioner/service/models.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace repositioner::service {

struct HoldoutSplit {
  data::Dataset train;  // every trace of the held-out links removed
  std::vector<std::pair<std::string, std::string>> held_out;  // (drug id, query id)
};

// Hides `fraction` of the drug-disease (disease-centric) or drug-target
// (target-centric) links: the association entries, every knowledge-graph
// triple joining the pair, and any DTI/CPI pair over it. At least one link
// is held out.
HoldoutSplit holdout_split(const data::Dataset& dataset, Center center, double fraction, std::uint64_t seed);

struct EvalReport {
  std::size_t held_out = 0;
  std::size_t queries = 0;  // held-out queries the model could score
  double auroc = 0.0;       // mean over queries of held-out links vs unlinked drugs
  double hits = 0.0;        // fraction of held-out links ranked within the top k
  int k = 10;
};

// Trains `kind` on the split and scores each held-out link against the
// drugs never linked to its query.
EvalReport evaluate_holdout(ModelKind kind, const data::Dataset& dataset, const TrainOptions& options,
                            double fraction, int k);

}  // namespace repositioner::service
