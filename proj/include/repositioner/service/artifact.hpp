#pragma once

#include "repositioner/common.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace repositioner::service {

// Everything a trained model needs to be rebuilt: named matrices, named
// string lists and the configuration it was trained with.
struct ModelBundle {
  std::string kind;
  std::string center;
  std::string fingerprint;  // vocabulary fingerprint of the training data
  std::vector<std::pair<std::string, std::string>> config;
  std::vector<std::pair<std::string, Matrix>> tensors;
  std::vector<std::pair<std::string, std::vector<std::string>>> lists;

  void put(const std::string& name, Matrix value);
  void put(const std::string& name, std::vector<std::string> value);
  bool has_tensor(const std::string& name) const;
  const Matrix& tensor(const std::string& name) const;
  const std::vector<std::string>& list(const std::string& name) const;
  double scalar(const std::string& name) const;
  std::string config_value(const std::string& key, const std::string& fallback = {}) const;

  bool operator==(const ModelBundle&) const = default;
};

// Byte encodings of the two blob files. Doubles are stored bit-exactly.
std::string encode_tensors(const ModelBundle& bundle);
std::string encode_meta(const ModelBundle& bundle);
ModelBundle decode_bundle(const std::string& meta, const std::string& tensors);

struct ArtifactEntry {
  std::string kind;
  std::string center;
  std::string version;
  std::string created;  // UTC, ISO 8601
  std::string fingerprint;
  std::vector<std::pair<std::string, std::string>> checksums;  // file -> sha256
};

// Layout: <dir>/manifest.json indexes every version; blobs live in
// <dir>/<kind>/<version>/{meta.json,tensors.bin}. The version id is derived
// from the blob contents, so identical training runs produce the same id.
class ArtifactStore {
 public:
  explicit ArtifactStore(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& dir() const { return dir_; }

  ArtifactEntry save(const ModelBundle& bundle) const;
  std::vector<ArtifactEntry> entries() const;
  // Latest entry of `kind` (last saved), or not_found.
  ArtifactEntry latest(const std::string& kind) const;
  ArtifactEntry find(const std::string& kind, const std::string& version) const;
  // Verifies checksums before decoding.
  ModelBundle load(const std::string& kind, const std::string& version = {}) const;

 private:
  std::filesystem::path dir_;
};

}  // namespace repositioner::service
