#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/entity.hpp"

#include <Eigen/Sparse>

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace repositioner::data {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

struct NetworkLayer {
  std::string name;
  EntityKind row_kind = EntityKind::drug;
  EntityKind col_kind = EntityKind::drug;
  bool symmetric = false;
  std::filesystem::path source;  // edge file the layer was read from
  SparseMatrix adjacency;

  bool square() const { return row_kind == col_kind; }
  Matrix dense() const { return Matrix(adjacency); }
};

// Binary drug-by-X association matrix (drug-disease, drug-target, ...).
struct AssociationMatrix {
  EntityKind row_kind = EntityKind::drug;
  EntityKind col_kind = EntityKind::disease;
  Matrix entries;

  void validate() const;
};

class LayeredNetworkSet {
 public:
  const std::vector<NetworkLayer>& layers() const { return layers_; }
  const NetworkLayer& layer(const std::string& name) const;
  bool has_layer(const std::string& name) const;

  const Vocabulary& vocab(EntityKind kind) const;
  bool has_vocab(EntityKind kind) const { return vocabs_.count(kind) != 0; }
  const std::map<EntityKind, Vocabulary>& vocabs() const { return vocabs_; }

  // Square layers over `kind` (excluding any named in `exclude`), in load order.
  std::vector<const NetworkLayer*> square_layers(EntityKind kind,
                                                 const std::vector<std::string>& exclude = {}) const;

  // First layer whose rows/cols are (row_kind, col_kind), binarized.
  AssociationMatrix association(EntityKind row_kind, EntityKind col_kind) const;
  const NetworkLayer* find_layer(EntityKind row_kind, EntityKind col_kind) const;

  void add_vocabulary(Vocabulary vocab);
  void add_layer(NetworkLayer layer);

 private:
  std::map<EntityKind, Vocabulary> vocabs_;
  std::vector<NetworkLayer> layers_;
};

class KeyValueFile;

// Manifest keys: `vocab.<kind> = file` (closed vocabulary, id<TAB>name),
// `layer.<name> = edge file`, `layer.<name>.rows`, `layer.<name>.cols`,
// `layer.<name>.symmetric`. Edge files hold source<TAB>target<TAB>weight.
LayeredNetworkSet load_network_layers(const std::filesystem::path& manifest_path);
LayeredNetworkSet load_network_layers(const KeyValueFile& manifest);

// Writes a manifest plus one vocabulary file per kind and one edge file per
// layer under `dir`; returns the manifest path.
std::filesystem::path write_network_layers(const LayeredNetworkSet& set,
                                           const std::filesystem::path& dir);

double max_asymmetry(const SparseMatrix& m);

}  // namespace repositioner::data
