#include "repositioner/fixtures/kg.hpp"

#include "repositioner/common.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace repositioner::fixtures {

namespace {

KgSplit split(std::vector<data::KgEntity> entities, const std::vector<data::Triple>& triples,
              const std::vector<std::size_t>& held_out) {
  const std::set<std::size_t> test(held_out.begin(), held_out.end());
  std::vector<data::Triple> train;
  for (std::size_t i = 0; i < triples.size(); ++i)
    if (!test.count(i)) train.push_back(triples[i]);
  KgSplit out;
  out.kg = data::KnowledgeGraph(std::move(entities), train);
  for (std::size_t i : test)
    out.test.push_back({out.kg.entity_index(triples[i].head), out.kg.relation_index(triples[i].relation),
                        out.kg.entity_index(triples[i].tail)});
  return out;
}

}  // namespace

std::vector<data::IndexedTriple> KgSplit::all_triples() const {
  std::vector<data::IndexedTriple> out = kg.triples();
  out.insert(out.end(), test.begin(), test.end());
  return out;
}

namespace {

}  // namespace

KgSplit compositional_kg(std::uint64_t seed) {
  constexpr int kChains = 10;
  std::vector<data::KgEntity> entities;
  auto id = [](int chain, int pos) { return "e" + std::to_string(chain) + "_" + std::to_string(pos); };
  for (int c = 0; c < kChains; ++c)
    for (int p = 0; p < 5; ++p) entities.push_back({{id(c, p), "entity " + id(c, p), data::EntityKind::other}, "Entity"});

  std::vector<data::Triple> triples;
  std::vector<std::vector<std::size_t>> triangle_closers;
  for (int c = 0; c < kChains; ++c) {
    for (int base : {0, 2}) {
      triples.push_back({id(c, base), "r1", id(c, base + 1)});
      triples.push_back({id(c, base + 1), "r2", id(c, base + 2)});
      triangle_closers.push_back({triples.size()});
      triples.push_back({id(c, base), "r3", id(c, base + 2)});
    }
    if (c + 1 < kChains) triples.push_back({id(c, 4), "r4", id(c + 1, 0)});
  }
  Rng rng = make_rng(seed, "fixture.compositional");
  std::shuffle(triangle_closers.begin(), triangle_closers.end(), rng);
  const std::size_t hold = (triples.size() + 5) / 10;
  std::vector<std::size_t> held;
  for (std::size_t k = 0; k < hold; ++k) held.push_back(triangle_closers[k][0]);
  return split(std::move(entities), triples, held);
}

KgSplit treatment_kg(int n, std::uint64_t seed) {
  require(n >= 2, ErrorCode::invalid_argument, "treatment fixture needs at least two triads");
  std::vector<data::KgEntity> entities;
  std::vector<data::Triple> triples;
  auto pad = [](int i) { return (i < 10 ? "0" : "") + std::to_string(i); };
  for (int i = 0; i < n; ++i) {
    entities.push_back({{"DB" + pad(i), "drug " + pad(i), data::EntityKind::drug}, "Compound"});
    entities.push_back({{"G" + pad(i), "gene " + pad(i), data::EntityKind::target}, "Gene"});
    entities.push_back({{"S" + pad(i), "disease " + pad(i), data::EntityKind::disease}, "Disease"});
  }
  std::vector<std::size_t> treats;
  for (int i = 0; i < n; ++i) {
    triples.push_back({"DB" + pad(i), "targets", "G" + pad(i)});
    triples.push_back({"G" + pad(i), "associated_with", "S" + pad(i)});
    treats.push_back(triples.size());
    triples.push_back({"DB" + pad(i), "treats", "S" + pad(i)});
  }
  Rng rng = make_rng(seed, "fixture.treatment");
  std::uniform_int_distribution<std::size_t> pick(0, treats.size() - 1);
  return split(std::move(entities), triples, {treats[pick(rng)]});
}

MtlFixture mtl_fixture(std::uint64_t seed) {
  constexpr int n = 10;
  Rng rng = make_rng(seed, "fixture.mtl");
  auto pad = [](int i) { return (i < 10 ? "0" : "") + std::to_string(i); };
  std::vector<data::KgEntity> entities;
  for (int i = 0; i < n; ++i) {
    entities.push_back({{"DB" + pad(i), "drug " + pad(i), data::EntityKind::drug}, "Compound"});
    entities.push_back({{"G" + pad(i), "gene " + pad(i), data::EntityKind::target}, "Gene"});
    entities.push_back({{"S" + pad(i), "disease " + pad(i), data::EntityKind::disease}, "Disease"});
  }
  std::vector<data::Triple> triples;
  for (int i = 0; i < n; ++i)
    for (int step : {2, 4}) {
      const int j = (i + step) % n;
      triples.push_back({"DB" + pad(i), "targets", "G" + pad(j)});
      triples.push_back({"G" + pad(i), "associated_with", "S" + pad(j)});
      triples.push_back({"DB" + pad(i), "treats", "S" + pad((i + step + 2) % n)});
    }

  MtlFixture out{data::KnowledgeGraph(std::move(entities), triples), {}, {}, {}, {}};
  std::uniform_int_distribution<int> atoms(4, 7), feature(0, 4), length(20, 30), residue(0, 5);
  const std::string residues[2] = {"ACDEFG", "KLMNPQ"};
  for (int i = 0; i < n; ++i) {
    data::MoleculeGraph mol;
    mol.id = "DB" + pad(i);
    const int count = atoms(rng);
    mol.atoms = Matrix::Zero(count, data::kAtomFeatureDim);
    for (int a = 0; a < count; ++a) {
      mol.atoms(a, 5 * (i % 2) + feature(rng)) = 1.0;
      if (a > 0) mol.bonds.emplace_back(a - 1, a);
    }
    out.molecules.push_back(std::move(mol));
    data::ProteinSequence protein{"G" + pad(i), ""};
    const int len = length(rng);
    for (int k = 0; k < len; ++k) protein.sequence += residues[i % 2][static_cast<std::size_t>(residue(rng))];
    out.proteins.push_back(std::move(protein));
  }
  for (int d = 0; d < n; ++d)
    for (int g = 0; g < n; ++g) {
      const int label = d % 2 == g % 2 ? 1 : 0;
      out.dti.push_back({"DB" + pad(d), "G" + pad(g), label});
      out.cpi.push_back({"DB" + pad(d), "G" + pad(g), label});
    }
  return out;
}

MiniKgLedger write_mini_kg(const std::filesystem::path& triples_path, const std::filesystem::path& metadata_path,
                           std::size_t entities, std::size_t relations, std::size_t triples_count,
                           std::uint64_t seed) {
  require(entities >= 2 && relations >= 1, ErrorCode::invalid_argument, "mini KG needs entities and relations");
  require(triples_count <= entities * entities * relations, ErrorCode::invalid_argument,
          "mini KG cannot hold that many distinct triples");
  Rng rng = make_rng(seed, "fixture.minikg");
  const std::vector<std::string> types = {"Compound", "Gene", "Disease", "Side Effect"};
  MiniKgLedger ledger;
  ledger.entities = entities;
  ledger.relations = relations;
  {
    std::ofstream meta(metadata_path);
    meta << "# id\ttype\tname\n";
    for (std::size_t i = 0; i < entities; ++i) {
      const std::string& type = types[i % types.size()];
      ++ledger.per_type[type];
      meta << "n" << i << '\t' << type << '\t' << "node " << i << '\n';
    }
  }
  std::uniform_int_distribution<std::size_t> pick_entity(0, entities - 1), pick_relation(0, relations - 1);
  std::bernoulli_distribution sprinkle(0.1);
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  std::vector<std::string> lines_written;
  std::ofstream out(triples_path);
  auto emit = [&](const std::string& line) {
    out << line << '\n';
    ++ledger.lines;
  };
  emit("# head\trelation\ttail");
  ++ledger.comments;
  while (seen.size() < triples_count) {
    const auto key = std::make_tuple(pick_entity(rng), pick_relation(rng), pick_entity(rng));
    if (!seen.insert(key).second) continue;
    const std::string line = "n" + std::to_string(std::get<0>(key)) + "\trel" + std::to_string(std::get<1>(key)) +
                             "\tn" + std::to_string(std::get<2>(key));
    ++ledger.per_relation["rel" + std::to_string(std::get<1>(key))];
    emit(line);
    lines_written.push_back(line);
    if (sprinkle(rng)) {
      std::uniform_int_distribution<std::size_t> earlier(0, lines_written.size() - 1);
      emit(lines_written[earlier(rng)]);
      ++ledger.duplicates;
    }
    if (sprinkle(rng)) {
      emit(seen.size() % 2 ? "" : "# comment");
      ++ledger.comments;
    }
  }
  ledger.unique_triples = seen.size();
  ledger.relations = ledger.per_relation.size();
  return ledger;
}

}  // namespace repositioner::fixtures
