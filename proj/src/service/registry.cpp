#include "repositioner/service/registry.hpp"

#include "repositioner/hash.hpp"

namespace repositioner::service {

const TrainedModel* RegistrySnapshot::model(ModelKind kind) const {
  const auto it = models.find(kind);
  return it == models.end() ? nullptr : it->second.get();
}

const ArtifactEntry* RegistrySnapshot::entry(ModelKind kind) const {
  const auto it = entries.find(kind);
  return it == entries.end() ? nullptr : &it->second;
}

std::shared_ptr<const RegistrySnapshot> load_snapshot(std::shared_ptr<const data::Dataset> dataset,
                                                      const ArtifactStore& store) {
  require(dataset != nullptr, ErrorCode::invalid_argument, "registry needs a dataset");
  auto snap = std::make_shared<RegistrySnapshot>();
  snap->dataset = std::move(dataset);
  for (const ArtifactEntry& e : store.entries()) {
    const ModelKind kind = parse_model_kind(e.kind);
    snap->entries[kind] = e;  // later manifest entries are newer
  }
  for (const auto& [kind, entry] : snap->entries)
    snap->models[kind] = restore_model(store.load(entry.kind, entry.version), *snap->dataset);
  return snap;
}

std::string state_hash(const RegistrySnapshot& snapshot) {
  std::string canon = snapshot.dataset ? snapshot.dataset->fingerprint : std::string();
  for (const auto& [k, v] : data::dataset_counts(*snapshot.dataset)) canon += k + '=' + std::to_string(v) + '\n';
  for (const auto& [kind, model] : snapshot.models) {
    const ModelBundle b = model->bundle();
    canon += sha256_hex(encode_meta(b)) + sha256_hex(encode_tensors(b));
  }
  for (const auto& [kind, e] : snapshot.entries) canon += e.kind + e.version;
  return sha256_hex(canon);
}

Registry::Registry(std::shared_ptr<const RegistrySnapshot> snapshot) : snapshot_(std::move(snapshot)) {
  require(snapshot_ != nullptr, ErrorCode::invalid_argument, "registry needs a snapshot");
}

std::shared_ptr<const RegistrySnapshot> Registry::current() const {
  std::lock_guard lock(mutex_);
  return snapshot_;
}

void Registry::replace(std::shared_ptr<const RegistrySnapshot> snapshot) {
  require(snapshot != nullptr, ErrorCode::invalid_argument, "registry needs a snapshot");
  std::lock_guard lock(mutex_);
  snapshot_ = std::move(snapshot);
}

}  // namespace repositioner::service
