#include "repositioner/fixtures/service.hpp"

#include "repositioner/common.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace repositioner::fixtures {

namespace fs = std::filesystem;

namespace {

constexpr int kGroups = 4;
constexpr int kDrugs = 40, kDiseases = 30, kTargets = 24, kSideEffects = 12;

std::string padded(int value, int width) {
  std::string s = std::to_string(value);
  return std::string(width > static_cast<int>(s.size()) ? width - s.size() : 0, '0') + s;
}

std::string drug_id(int i) { return "DB" + padded(i + 1, 5); }
std::string disease_id(int j) { return j == 0 ? "C0342731" : "C9" + padded(j + 1, 6); }
std::string target_id(int k) { return k == 0 ? "9971" : std::to_string(10100 + k); }
std::string side_effect_id(int s) { return "SE" + padded(s + 1, 3); }

std::string disease_name(int j) {
  if (j == 0) return "Deficiency of mevalonate kinase";
  if (j == 27 || j == 28) return "Periodic fever syndrome";
  return "Disease " + padded(j + 1, 2);
}
std::string target_name(int k) { return k == 0 ? "NR1H4" : k == 1 ? "NR1H3" : "GENE" + padded(k + 1, 2); }

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::io, "cannot write " + path.string());
  out << text;
}

std::string weight_text(double w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", w);
  return buf;
}

struct Edge {
  int a, b;
  double w;
};

struct LayerSpec {
  std::string name, rows, cols;
  bool symmetric;
  std::vector<Edge> edges;
};

class Writer {
 public:
  explicit Writer(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

  void vocab(const std::string& kind, const std::vector<std::pair<std::string, std::string>>& entries) {
    std::ostringstream s;
    s << "# " << kind << " vocabulary\n";
    for (const auto& [id, name] : entries) s << id << '\t' << name << '\n';
    write(dir_ / ("vocab_" + kind + ".tsv"), s.str());
    manifest_ << "vocab." << kind << " = vocab_" << kind << ".tsv\n";
  }

  void layer(const LayerSpec& spec, const std::vector<std::string>& row_ids, const std::vector<std::string>& col_ids,
             std::map<std::string, std::size_t>& ledger) {
    std::ostringstream s;
    for (const auto& e : spec.edges) s << row_ids[e.a] << '\t' << col_ids[e.b] << '\t' << weight_text(e.w) << '\n';
    const std::string file = "layer_" + spec.name + ".tsv";
    write(dir_ / file, s.str());
    manifest_ << "layer." << spec.name << " = " << file << '\n'
              << "layer." << spec.name << ".rows = " << spec.rows << '\n'
              << "layer." << spec.name << ".cols = " << spec.cols << '\n'
              << "layer." << spec.name << ".symmetric = " << (spec.symmetric ? "true" : "false") << '\n';
    ledger["layer." + spec.name + ".nonzeros"] = spec.edges.size() * (spec.symmetric ? 2 : 1);
  }

  void entry(const std::string& key, const std::string& file, const std::string& text) {
    write(dir_ / file, text);
    manifest_ << key << " = " << file << '\n';
  }
  void line(const std::string& text) { manifest_ << text << '\n'; }

  fs::path finish() {
    write(dir_ / "dataset.conf", manifest_.str());
    return dir_ / "dataset.conf";
  }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::ostringstream manifest_;
};

// Undirected edges i<j over n nodes: probability `same` inside a group and
// `cross` across groups.
std::vector<Edge> planted_square(int n, double same, double cross, Rng& rng, const std::set<int>& skip = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Edge> out;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const bool together = i % kGroups == j % kGroups;
      const double p = u(rng), w = together ? 0.5 + 0.5 * u(rng) : 0.1 + 0.3 * u(rng);
      if (skip.count(i) || skip.count(j)) continue;
      if (p < (together ? same : cross)) out.push_back({i, j, w});
    }
  return out;
}

// Binary bipartite edges, at least one per row and one per column outside
// `isolated_cols`.
std::vector<Edge> planted_bipartite(int rows, int cols, double same, double cross, Rng& rng,
                                    const std::set<int>& isolated_cols = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::set<std::pair<int, int>> cells;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      if (!isolated_cols.count(j) && u(rng) < (i % kGroups == j % kGroups ? same : cross)) cells.insert({i, j});
  for (int i = 0; i < rows; ++i) {
    bool any = false;
    for (int j = 0; j < cols && !any; ++j) any = cells.count({i, j}) != 0;
    if (!any)
      for (int j = i % kGroups; j < cols; j += kGroups)
        if (!isolated_cols.count(j)) {
          cells.insert({i, j});
          break;
        }
  }
  for (int j = 0; j < cols; ++j) {
    if (isolated_cols.count(j)) continue;
    bool any = false;
    for (int i = 0; i < rows && !any; ++i) any = cells.count({i, j}) != 0;
    if (!any) cells.insert({j % kGroups, j});
  }
  std::vector<Edge> out;
  for (const auto& [i, j] : cells) out.push_back({i, j, 1.0});
  return out;
}

}  // namespace

ServiceFixture write_service_fixture(const fs::path& dir, std::uint64_t seed) {
  Rng rng = make_rng(seed, "fixture.service");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ServiceFixture fx;
  Writer w(dir);

  std::vector<std::string> drugs, diseases, targets, side_effects;
  std::vector<std::pair<std::string, std::string>> drug_vocab, disease_vocab, target_vocab, se_vocab;
  for (int i = 0; i < kDrugs; ++i) {
    drugs.push_back(drug_id(i));
    drug_vocab.emplace_back(drugs.back(), "Drug-" + padded(i + 1, 2));
    fx.group[drugs.back()] = i % kGroups;
  }
  for (int j = 0; j < kDiseases; ++j) {
    diseases.push_back(disease_id(j));
    disease_vocab.emplace_back(diseases.back(), disease_name(j));
    fx.group[diseases.back()] = j % kGroups;
  }
  for (int k = 0; k < kTargets; ++k) {
    targets.push_back(target_id(k));
    target_vocab.emplace_back(targets.back(), target_name(k));
    fx.group[targets.back()] = k % kGroups;
  }
  for (int s = 0; s < kSideEffects; ++s) {
    side_effects.push_back(side_effect_id(s));
    se_vocab.emplace_back(side_effects.back(), "Side effect " + padded(s + 1, 2));
  }
  w.line("# service fixture dataset");
  w.vocab("drug", drug_vocab);
  w.vocab("disease", disease_vocab);
  w.vocab("target", target_vocab);
  w.vocab("side_effect", se_vocab);

  const int last = kDrugs - 1;
  const int orphan_disease = kDiseases - 1;
  std::vector<LayerSpec> layers;
  for (const char* name : {"therapeutic", "chemical", "target-sequence", "go-bp", "go-cc", "go-mf"}) {
    const bool partial = std::string(name) == "go-cc" || std::string(name) == "go-mf";
    LayerSpec l{name, "drug", "drug", true, planted_square(kDrugs, 0.5, 0.05, rng, partial ? std::set<int>{last}
                                                                                            : std::set<int>{})};
    if (!partial) {
      bool linked = false;
      for (const auto& e : l.edges) linked = linked || e.a == last || e.b == last;
      if (!linked) l.edges.push_back({last - kGroups, last, 0.9});
    }
    layers.push_back(std::move(l));
  }
  layers.push_back({"drug-drug", "drug", "drug", true, planted_square(kDrugs, 0.1, 0.1, rng)});
  const std::vector<Edge> dd = planted_bipartite(kDrugs, kDiseases, 0.3, 0.02, rng, {orphan_disease});
  const std::vector<Edge> dt = planted_bipartite(kDrugs, kTargets, 0.3, 0.02, rng);
  const std::vector<Edge> ds = planted_bipartite(kDrugs, kSideEffects, 0.2, 0.1, rng);
  layers.push_back({"drug-disease", "drug", "disease", false, dd});
  layers.push_back({"drug-target", "drug", "target", false, dt});
  layers.push_back({"drug-side-effect", "drug", "side_effect", false, ds});
  const std::vector<Edge> ppi = planted_square(kTargets, 0.4, 0.02, rng);
  layers.push_back({"ppi", "target", "target", true, ppi});

  const std::map<std::string, const std::vector<std::string>*> ids = {
      {"drug", &drugs}, {"disease", &diseases}, {"target", &targets}, {"side_effect", &side_effects}};
  for (const auto& l : layers) w.layer(l, *ids.at(l.rows), *ids.at(l.cols), fx.ledger);
  fx.ledger["network.drug"] = kDrugs;
  fx.ledger["network.disease"] = kDiseases;
  fx.ledger["network.target"] = kTargets;
  fx.ledger["network.side-effect"] = kSideEffects;
  fx.ledger["network.layers"] = layers.size();

  // Knowledge graph over the same ids plus the orphan gene.
  std::ostringstream meta, triples;
  std::size_t triple_count = 0;
  std::set<std::string> relations;
  auto triple = [&](const std::string& h, const std::string& r, const std::string& t) {
    triples << h << '\t' << r << '\t' << t << '\n';
    relations.insert(r);
    ++triple_count;
  };
  for (const auto& [id, name] : drug_vocab) meta << id << "\tCompound\t" << name << '\n';
  for (const auto& [id, name] : disease_vocab) meta << id << "\tDisease\t" << name << '\n';
  for (const auto& [id, name] : target_vocab) meta << id << "\tGene\t" << name << '\n';
  for (const auto& [id, name] : se_vocab) meta << id << "\tSide Effect\t" << name << '\n';
  meta << "99999\tGene\tORPHAN1\n";
  for (const auto& e : dd) triple(drugs[e.a], "treats", diseases[e.b]);
  for (const auto& e : dt) triple(drugs[e.a], "targets", targets[e.b]);
  for (const auto& e : ds) triple(drugs[e.a], "causes", side_effects[e.b]);
  for (const auto& e : ppi) triple(targets[e.a], "interacts_with", targets[e.b]);
  for (int k = 0; k < kTargets; ++k)
    for (int j = 0; j < kDiseases; ++j)
      if (j != orphan_disease && u(rng) < (k % kGroups == j % kGroups ? 0.25 : 0.01))
        triple(targets[k], "associated_with", diseases[j]);
  triple("99999", "associated_with", diseases[orphan_disease]);
  w.entry("kg.triples", "kg_triples.tsv", triples.str());
  w.entry("kg.entities", "kg_entities.tsv", meta.str());
  w.line("kg.entity_types = Compound, Disease, Gene, Side Effect");
  fx.ledger["kg.entities"] = kDrugs + kDiseases + kTargets + kSideEffects + 1;
  fx.ledger["kg.relations"] = relations.size();
  fx.ledger["kg.triples"] = triple_count;
  fx.ledger["kg.entity_types"] = 4;

  std::ostringstream features;
  std::normal_distribution<double> noise(0.0, 0.1);
  for (int j = 0; j < kDiseases; ++j) {
    features << diseases[j];
    for (int c = 0; c < 8; ++c) features << '\t' << weight_text((c == j % kGroups ? 1.0 : 0.0) + noise(rng));
    features << '\n';
  }
  w.entry("features.disease", "features_disease.tsv", features.str());
  fx.ledger["features.disease"] = kDiseases;

  std::ostringstream records;
  for (int i = 0; i < kDrugs; ++i) {
    if (i == kDrugs - 2) continue;
    const int g = i % kGroups;
    records << drugs[i] << "\tA0" << g + 1 << "AA" << padded(i + 1, 2) << ",L0" << g + 1 << "XX" << padded(i + 1, 2)
            << "\tSynthetic compound " << i + 1 << " from planted group " << g << "."
            << "\tIndicated for group " << g << " conditions."
            << "\t" << std::string(static_cast<std::size_t>(i % 5 + 1), 'C') << "(=O)N" << '\n';
  }
  w.entry("drugs.records", "drug_records.tsv", records.str());
  fx.ledger["drug_records"] = kDrugs - 1;

  std::ostringstream molecules;
  std::uniform_int_distribution<int> atom_count(4, 7), slot(0, 4);
  for (int i = 0; i < kDrugs; ++i) {
    const int atoms = atom_count(rng);
    molecules << "mol\t" << drugs[i] << '\t' << atoms << '\t' << atoms - 1 << '\n';
    for (int a = 0; a < atoms; ++a) {
      const int hot = 10 * (i % kGroups) + slot(rng);
      for (int f = 0; f < 78; ++f) molecules << (f ? "\t" : "") << (f == hot ? "1" : "0");
      molecules << '\n';
    }
    for (int a = 0; a + 1 < atoms; ++a) molecules << a << '\t' << a + 1 << '\n';
  }
  w.entry("molecules", "molecules.txt", molecules.str());
  fx.ledger["molecules"] = kDrugs;

  std::ostringstream proteins;
  const std::string alphabets[kGroups] = {"ACDE", "FGHI", "KLMN", "PQRS"};
  std::uniform_int_distribution<int> length(20, 30), letter(0, 3);
  for (int k = 0; k < kTargets; ++k) {
    std::string seq;
    const int n = length(rng);
    for (int c = 0; c < n; ++c) seq.push_back(alphabets[k % kGroups][static_cast<std::size_t>(letter(rng))]);
    proteins << targets[k] << '\t' << seq << '\n';
  }
  w.entry("proteins", "proteins.tsv", proteins.str());
  fx.ledger["proteins"] = kTargets;

  // DTI/CPI pairs: every known drug-target link plus as many sampled non-links.
  std::set<std::pair<int, int>> known;
  for (const auto& e : dt) known.insert({e.a, e.b});
  std::ostringstream pairs;
  std::size_t pair_count = 0;
  std::uniform_int_distribution<int> pick(0, kTargets - 1);
  for (int i = 0; i < kDrugs; ++i) {
    std::set<int> negatives;
    int positives = 0;
    for (int k = 0; k < kTargets; ++k)
      if (known.count({i, k})) {
        pairs << drugs[i] << '\t' << targets[k] << "\t1\n";
        ++positives;
      }
    while (static_cast<int>(negatives.size()) < positives) {
      const int k = pick(rng);
      if (!known.count({i, k})) negatives.insert(k);
    }
    for (int k : negatives) pairs << drugs[i] << '\t' << targets[k] << "\t0\n";
    pair_count += static_cast<std::size_t>(2 * positives);
  }
  w.entry("pairs.dti", "pairs_dti.tsv", pairs.str());
  w.entry("pairs.cpi", "pairs_cpi.tsv", pairs.str());
  fx.ledger["pairs.dti"] = pair_count;
  fx.ledger["pairs.cpi"] = pair_count;

  fx.manifest = w.finish();
  fx.config = dir / "train.conf";
  write(fx.config,
        "# small settings for the service fixture\n"
        "data = dataset.conf\n"
        "deepdr.mda_dim = 16\n"
        "deepdr.latent = 8\n"
        "deepdr.hidden = 32\n"
        "hetdr.dim = 16\n"
        "hetdr.neighbor_dim = 16\n"
        "hetdr.attention_dim = 8\n"
        "hetdr.walks = 4\n"
        "hetdr.walk_length = 10\n"
        "hetdr.epochs = 3\n"
        "diskge.dim = 16\n"
        "diskge.epochs = 80\n"
        "diskge.batch_size = 128\n"
        "aopedf.dim = 16\n"
        "tarkge.dim = 16\n"
        "tarkge.epochs = 80\n"
        "tarkge.batch_size = 128\n"
        "kgmtl.residue_dim = 8\n"
        "kgmtl.channels = 8\n");
  return fx;
}

SchemaFixture write_deepdr_schema(const fs::path& dir, std::size_t edges_per_layer, std::uint64_t seed) {
  Rng rng = make_rng(seed, "fixture.deepdr_schema");
  SchemaFixture fx;
  Writer w(dir);
  const std::map<std::string, int> sizes = {
      {"drug", 1519}, {"disease", 1229}, {"target", 1025}, {"side_effect", 12904}};
  std::map<std::string, std::vector<std::string>> ids;
  for (const auto& [kind, n] : sizes) {
    std::vector<std::pair<std::string, std::string>> vocab;
    for (int i = 0; i < n; ++i) {
      ids[kind].push_back(kind.substr(0, 2) + padded(i, 5));
      vocab.emplace_back(ids[kind].back(), kind + " " + std::to_string(i));
    }
    w.vocab(kind, vocab);
    fx.ledger["network." + kind] = static_cast<std::size_t>(n);
  }
  const std::vector<std::pair<std::string, std::string>> schema = {
      {"drug-drug", "drug"},       {"drug-disease", "disease"}, {"drug-side-effect", "side_effect"},
      {"drug-target", "target"},   {"chemical", "drug"},        {"therapeutic", "drug"},
      {"target-sequence", "drug"}, {"go-bp", "drug"},           {"go-cc", "drug"},
      {"go-mf", "drug"}};
  for (const auto& [name, cols] : schema) {
    const bool square = cols == "drug";
    std::uniform_int_distribution<int> r(0, sizes.at("drug") - 1), c(0, sizes.at(cols) - 1);
    std::uniform_real_distribution<double> weight(0.05, 1.0);
    std::set<std::pair<int, int>> seen;
    LayerSpec l{name, "drug", cols, square, {}};
    while (l.edges.size() < edges_per_layer) {
      int a = r(rng), b = c(rng);
      if (square && a == b) continue;
      if (square && a > b) std::swap(a, b);
      if (seen.insert({a, b}).second) l.edges.push_back({a, b, square ? weight(rng) : 1.0});
    }
    w.layer(l, ids.at("drug"), ids.at(cols), fx.ledger);
  }
  fx.ledger["network.layers"] = schema.size();
  fx.manifest = w.finish();
  return fx;
}

}  // namespace repositioner::fixtures
