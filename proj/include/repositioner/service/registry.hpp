#pragma once

#include "repositioner/data/dataset.hpp"
#include "repositioner/service/artifact.hpp"
#include "repositioner/service/models.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <string>

namespace repositioner::service {

// One immutable view of the data plus every loaded model.
struct RegistrySnapshot {
  std::shared_ptr<const data::Dataset> dataset;
  std::map<ModelKind, std::shared_ptr<const TrainedModel>> models;
  std::map<ModelKind, ArtifactEntry> entries;

  const TrainedModel* model(ModelKind kind) const;
  const ArtifactEntry* entry(ModelKind kind) const;
};

// Restores the newest artifact of every kind found in `store`. A fingerprint
// or checksum failure on any artifact aborts the whole load.
std::shared_ptr<const RegistrySnapshot> load_snapshot(std::shared_ptr<const data::Dataset> dataset,
                                                      const ArtifactStore& store);

// Hash over the dataset fingerprint and every model's serialized bundle.
std::string state_hash(const RegistrySnapshot& snapshot);

// Readers take the current snapshot and keep it for the whole request;
// `replace` swaps in a new one without disturbing them.
class Registry {
 public:
  explicit Registry(std::shared_ptr<const RegistrySnapshot> snapshot);

  std::shared_ptr<const RegistrySnapshot> current() const;
  void replace(std::shared_ptr<const RegistrySnapshot> snapshot);

 private:
  mutable std::mutex mutex_;
  std::shared_ptr<const RegistrySnapshot> snapshot_;
};

}  // namespace repositioner::service
