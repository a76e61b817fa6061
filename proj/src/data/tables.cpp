#include "repositioner/data/tables.hpp"

#include "text_io.hpp"

#include <set>
#include <sstream>

namespace repositioner::data {

FeatureTable::FeatureTable(EntityKind kind, std::vector<std::string> ids, Matrix values)
    : kind_(kind), ids_(std::move(ids)), values_(std::move(values)) {
  require(static_cast<Index>(ids_.size()) == values_.rows(), ErrorCode::dimension_mismatch,
          "feature table id count does not match row count");
  require(values_.allFinite(), ErrorCode::non_finite, "feature table has non-finite values");
  for (std::size_t i = 0; i < ids_.size(); ++i)
    require(index_.emplace(ids_[i], i).second, ErrorCode::validation,
            "duplicate feature id '" + ids_[i] + "'");
}

Eigen::RowVectorXd FeatureTable::row(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) fail(ErrorCode::not_found, "no features for '" + std::string(id) + "'");
  return values_.row(static_cast<Index>(it->second));
}

Matrix FeatureTable::aligned(const Vocabulary& vocab) const {
  Matrix out(static_cast<Index>(vocab.size()), dim());
  for (std::size_t i = 0; i < vocab.size(); ++i) out.row(static_cast<Index>(i)) = row(vocab.id(i));
  return out;
}

void MoleculeGraph::validate() const {
  require(atoms.rows() >= 1, ErrorCode::validation, "molecule '" + id + "' has no atoms");
  require(atoms.cols() == kAtomFeatureDim, ErrorCode::dimension_mismatch,
          "molecule '" + id + "' atom features must have 78 columns");
  require(atoms.allFinite(), ErrorCode::non_finite, "molecule '" + id + "' has non-finite features");
  for (auto [a, b] : bonds)
    require(a >= 0 && b >= 0 && a < atoms.rows() && b < atoms.rows(), ErrorCode::validation,
            "molecule '" + id + "' bond endpoint out of range");
}

void ProteinSequence::validate() const {
  require(!sequence.empty(), ErrorCode::validation, "protein '" + id + "' has an empty sequence");
  for (char c : sequence)
    require(kAminoAlphabet.find(c) != std::string_view::npos, ErrorCode::validation,
            "protein '" + id + "' has illegal residue '" + std::string(1, c) + "'");
}

namespace {

void check_id(const IdResolver& resolve, EntityKind kind, const std::string& id, const std::string& where) {
  if (resolve && !resolve(kind, id))
    fail(ErrorCode::validation,
         where + ": unresolvable " + std::string(to_string(kind)) + " id '" + id + "'");
}

}  // namespace

FeatureTable load_feature_table(const std::filesystem::path& path, EntityKind kind,
                                const IdResolver& resolve) {
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  for (const auto& row : detail::read_tsv(path)) {
    const std::string where = path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() >= 2, ErrorCode::parse, where + ": expected id and at least one value");
    const std::size_t dim = row.fields.size() - 1;
    if (!rows.empty())
      require(dim == rows.front().size(), ErrorCode::dimension_mismatch,
              where + ": vector dimension " + std::to_string(dim) + " != " +
                  std::to_string(rows.front().size()));
    check_id(resolve, kind, row.fields[0], where);
    std::vector<double> values;
    for (std::size_t j = 1; j < row.fields.size(); ++j)
      values.push_back(detail::parse_double(row.fields[j], where));
    ids.push_back(row.fields[0]);
    rows.push_back(std::move(values));
  }
  Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return FeatureTable(kind, std::move(ids), std::move(m));
}

void write_feature_table(const FeatureTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  for (std::size_t i = 0; i < table.size(); ++i) {
    out << table.ids()[i];
    for (Index j = 0; j < table.dim(); ++j)
      out << '\t' << detail::format_double(table.values()(static_cast<Index>(i), j));
    out << '\n';
  }
  detail::write_file(path, out.str());
}

std::vector<DrugRecord> load_drug_records(const std::filesystem::path& path, const IdResolver& resolve) {
  std::vector<DrugRecord> out;
  std::set<std::string> seen;
  for (const auto& row : detail::read_tsv(path)) {
    const std::string where = path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 5, ErrorCode::parse,
            where + ": expected id, ATC codes, background, indication, structure");
    check_id(resolve, EntityKind::drug, row.fields[0], where);
    require(seen.insert(row.fields[0]).second, ErrorCode::validation,
            where + ": duplicate drug record '" + row.fields[0] + "'");
    DrugRecord r;
    r.drug_id = row.fields[0];
    if (!row.fields[1].empty())
      for (auto& code : detail::split(row.fields[1], ','))
        if (auto t = detail::trim(code); !t.empty()) r.atc_codes.emplace_back(t);
    r.background = row.fields[2];
    r.indication = row.fields[3];
    r.structure = row.fields[4];
    out.push_back(std::move(r));
  }
  return out;
}

void write_drug_records(const std::vector<DrugRecord>& records, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& r : records) {
    out << r.drug_id << '\t';
    for (std::size_t i = 0; i < r.atc_codes.size(); ++i) out << (i ? "," : "") << r.atc_codes[i];
    out << '\t' << r.background << '\t' << r.indication << '\t' << r.structure << '\n';
  }
  detail::write_file(path, out.str());
}

std::vector<MoleculeGraph> load_molecules(const std::filesystem::path& path, const IdResolver& resolve) {
  const auto rows = detail::read_tsv(path);
  std::vector<MoleculeGraph> out;
  std::set<std::string> seen;
  std::size_t r = 0;
  while (r < rows.size()) {
    const auto& header = rows[r];
    const std::string where = path.string() + ":" + std::to_string(header.line_no);
    require(header.fields.size() == 4 && header.fields[0] == "mol", ErrorCode::parse,
            where + ": malformed block header, expected mol<TAB>id<TAB>atoms<TAB>bonds");
    MoleculeGraph mol;
    mol.id = header.fields[1];
    check_id(resolve, EntityKind::drug, mol.id, where);
    require(seen.insert(mol.id).second, ErrorCode::validation, where + ": duplicate molecule '" + mol.id + "'");
    const long long atoms = detail::parse_int(header.fields[2], where);
    const long long bonds = detail::parse_int(header.fields[3], where);
    require(atoms >= 1 && bonds >= 0, ErrorCode::parse, where + ": malformed block counts");
    require(r + 1 + static_cast<std::size_t>(atoms + bonds) <= rows.size(), ErrorCode::parse,
            where + ": truncated molecule block");
    ++r;
    mol.atoms.resize(atoms, kAtomFeatureDim);
    for (long long a = 0; a < atoms; ++a, ++r) {
      const auto& row = rows[r];
      const std::string at = path.string() + ":" + std::to_string(row.line_no);
      require(static_cast<Index>(row.fields.size()) == kAtomFeatureDim, ErrorCode::dimension_mismatch,
              at + ": atom row has " + std::to_string(row.fields.size()) + " features, expected 78");
      for (Index j = 0; j < kAtomFeatureDim; ++j)
        mol.atoms(a, j) = detail::parse_double(row.fields[static_cast<std::size_t>(j)], at);
    }
    for (long long b = 0; b < bonds; ++b, ++r) {
      const auto& row = rows[r];
      const std::string at = path.string() + ":" + std::to_string(row.line_no);
      require(row.fields.size() == 2, ErrorCode::parse, at + ": bond row must have two atom indices");
      mol.bonds.emplace_back(static_cast<int>(detail::parse_int(row.fields[0], at)),
                             static_cast<int>(detail::parse_int(row.fields[1], at)));
    }
    mol.validate();
    out.push_back(std::move(mol));
  }
  return out;
}

void write_molecules(const std::vector<MoleculeGraph>& molecules, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& m : molecules) {
    out << "mol\t" << m.id << '\t' << m.atoms.rows() << '\t' << m.bonds.size() << '\n';
    for (Index a = 0; a < m.atoms.rows(); ++a) {
      for (Index j = 0; j < m.atoms.cols(); ++j)
        out << (j ? "\t" : "") << detail::format_double(m.atoms(a, j));
      out << '\n';
    }
    for (auto [a, b] : m.bonds) out << a << '\t' << b << '\n';
  }
  detail::write_file(path, out.str());
}

std::vector<ProteinSequence> load_proteins(const std::filesystem::path& path, const IdResolver& resolve) {
  std::vector<ProteinSequence> out;
  std::set<std::string> seen;
  for (const auto& row : detail::read_tsv(path)) {
    const std::string where = path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 2, ErrorCode::parse, where + ": expected id<TAB>sequence");
    check_id(resolve, EntityKind::target, row.fields[0], where);
    require(seen.insert(row.fields[0]).second, ErrorCode::validation,
            where + ": duplicate protein '" + row.fields[0] + "'");
    ProteinSequence p{row.fields[0], row.fields[1]};
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

void write_proteins(const std::vector<ProteinSequence>& proteins, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& p : proteins) out << p.id << '\t' << p.sequence << '\n';
  detail::write_file(path, out.str());
}

std::vector<LabeledPair> load_pairs(const std::filesystem::path& path) {
  std::vector<LabeledPair> out;
  for (const auto& row : detail::read_tsv(path)) {
    const std::string where = path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 3, ErrorCode::parse, where + ": expected id<TAB>id<TAB>label");
    const long long label = detail::parse_int(row.fields[2], where);
    require(label == 0 || label == 1, ErrorCode::validation, where + ": label must be 0 or 1");
    out.push_back({row.fields[0], row.fields[1], static_cast<int>(label)});
  }
  return out;
}

void write_pairs(const std::vector<LabeledPair>& pairs, const std::filesystem::path& path) {
  std::ostringstream out;
  for (const auto& p : pairs) out << p.first << '\t' << p.second << '\t' << p.label << '\n';
  detail::write_file(path, out.str());
}

}  // namespace repositioner::data
