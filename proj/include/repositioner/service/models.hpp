#pragma once

#include "repositioner/data/dataset.hpp"
#include "repositioner/data/key_value.hpp"
#include "repositioner/kge/rotate.hpp"
#include "repositioner/predict/ranking.hpp"
#include "repositioner/service/artifact.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace repositioner::service {

enum class ModelKind { deepdr, hetdr, diskge, deepdtnet, aopedf, tarkge, kgmtl };
enum class Center { disease_centric, target_centric };
enum class ExplanationShape { paths, similarity };

inline constexpr std::array<ModelKind, 7> kAllModelKinds = {ModelKind::deepdr,    ModelKind::hetdr,
                                                            ModelKind::diskge,    ModelKind::deepdtnet,
                                                            ModelKind::aopedf,    ModelKind::tarkge,
                                                            ModelKind::kgmtl};

std::string_view to_string(ModelKind kind);
std::string_view to_string(Center center);
std::string_view to_string(ExplanationShape shape);

// "rotate" is accepted as an alias of diskge.
ModelKind parse_model_kind(std::string_view name);
Center parse_center(std::string_view name);

Center center_of(ModelKind kind);
data::EntityKind query_kind(Center center);
ExplanationShape explanation_of(ModelKind kind);

// A trained ranker: drugs for one disease (disease-centric) or one target
// (target-centric). Immutable and safe for concurrent readers.
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  virtual ModelKind kind() const = 0;
  // Drugs already linked to the query are never returned. Throws not_found
  // when the query is outside what the model can score.
  virtual predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const = 0;
  // True when `rank` accepts this query id.
  virtual bool covers(std::string_view query_id) const = 0;
  virtual ModelBundle bundle() const = 0;
};

// Hyperparameters come from the `<kind>.` section of `config`; `seed`
// overrides any seed there.
struct TrainOptions {
  data::KeyValueFile config;
  std::uint64_t seed = 0;
};

std::unique_ptr<TrainedModel> train_model(ModelKind kind, const data::Dataset& dataset, const TrainOptions& options);

// Models keep a reference to `dataset`, which must outlive them.
//
// Rebuilds a model against `dataset`; raises a fingerprint error when the
// dataset vocabularies differ from those the model was trained on.
std::unique_ptr<TrainedModel> restore_model(const ModelBundle& bundle, const data::Dataset& dataset);

// Embedding behind a diskge or tarkge model; not_found for other kinds.
const kge::RotateModel& rotate_parameters(const TrainedModel& model);

}  // namespace repositioner::service
