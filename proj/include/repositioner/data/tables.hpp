#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/entity.hpp"

#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace repositioner::data {

inline constexpr Index kAtomFeatureDim = 78;

// Dense per-entity feature vectors sharing one dimension.
class FeatureTable {
 public:
  FeatureTable() = default;
  FeatureTable(EntityKind kind, std::vector<std::string> ids, Matrix values);

  EntityKind kind() const { return kind_; }
  Index dim() const { return values_.cols(); }
  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Matrix& values() const { return values_; }

  bool contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }
  Eigen::RowVectorXd row(std::string_view id) const;

  // Rows re-ordered to follow `vocab`; ids missing from the table throw.
  Matrix aligned(const Vocabulary& vocab) const;

  bool operator==(const FeatureTable& other) const {
    return kind_ == other.kind_ && ids_ == other.ids_ && values_ == other.values_;
  }

 private:
  EntityKind kind_ = EntityKind::other;
  std::vector<std::string> ids_;
  Matrix values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct DrugRecord {
  std::string drug_id;
  std::vector<std::string> atc_codes;
  std::string background;
  std::string indication;
  std::string structure;

  bool operator==(const DrugRecord&) const = default;
};

struct MoleculeGraph {
  std::string id;
  Matrix atoms;  // atom count x 78
  std::vector<std::pair<int, int>> bonds;

  void validate() const;
  bool operator==(const MoleculeGraph&) const = default;
};

struct ProteinSequence {
  std::string id;
  std::string sequence;

  void validate() const;
  bool operator==(const ProteinSequence&) const = default;
};

struct LabeledPair {
  std::string first;
  std::string second;
  int label = 0;

  bool operator==(const LabeledPair&) const = default;
};

inline constexpr std::string_view kAminoAlphabet = "ACDEFGHIKLMNPQRSTVWYX";

// Membership test used to cross-reference table ids against vocabularies.
using IdResolver = std::function<bool(EntityKind, std::string_view)>;

// TSV id<TAB>v1<TAB>...; all rows must share one dimension.
FeatureTable load_feature_table(const std::filesystem::path& path, EntityKind kind,
                                const IdResolver& resolve);
void write_feature_table(const FeatureTable& table, const std::filesystem::path& path);

// TSV id<TAB>atc codes (comma separated)<TAB>background<TAB>indication<TAB>structure.
std::vector<DrugRecord> load_drug_records(const std::filesystem::path& path, const IdResolver& resolve);
void write_drug_records(const std::vector<DrugRecord>& records, const std::filesystem::path& path);

// Block format, one block per molecule:
//   mol<TAB>id<TAB>atom-count<TAB>bond-count
//   <78 tab-separated atom features>      (atom-count rows)
//   <atom index><TAB><atom index>         (bond-count rows)
std::vector<MoleculeGraph> load_molecules(const std::filesystem::path& path, const IdResolver& resolve);
void write_molecules(const std::vector<MoleculeGraph>& molecules, const std::filesystem::path& path);

// TSV id<TAB>sequence.
std::vector<ProteinSequence> load_proteins(const std::filesystem::path& path, const IdResolver& resolve);
void write_proteins(const std::vector<ProteinSequence>& proteins, const std::filesystem::path& path);

// TSV first<TAB>second<TAB>label (0/1).
std::vector<LabeledPair> load_pairs(const std::filesystem::path& path);
void write_pairs(const std::vector<LabeledPair>& pairs, const std::filesystem::path& path);

}  // namespace repositioner::data
