#include "repositioner/data/dataset.hpp"
#include "repositioner/fixtures/kg.hpp"
#include "repositioner/fixtures/service.hpp"

#include "support/fixture_registry.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

namespace fs = std::filesystem;
using namespace repositioner;
using data::EntityKind;

namespace {

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream(path) << text;
}

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::invalid_argument;
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = repositioner::testing::scratch_dir(std::string("data-") + info->test_suite_name() + "-" + info->name());
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

using KeyValue = TempDir;
using Layers = TempDir;
using Kg = TempDir;
using Tables = TempDir;
using DatasetLoad = TempDir;

}  // namespace

TEST_F(KeyValue, SectionsCommentsAndTypedGetters) {
  write_text(dir_ / "a.conf", "# comment\nseed = 7\n[deepdr]\nlatent = 8 \nflag = true\n\nrate=0.5\n");
  const auto kv = data::KeyValueFile::load(dir_ / "a.conf");
  EXPECT_EQ(kv.get_int("seed", 0), 7);
  EXPECT_EQ(kv.get_or("deepdr.latent", ""), "8");
  EXPECT_TRUE(kv.get_bool("deepdr.flag", false));
  EXPECT_DOUBLE_EQ(kv.get_double("deepdr.rate", 0.0), 0.5);
  EXPECT_FALSE(kv.get("latent").has_value());
  EXPECT_EQ(kv.with_prefix("deepdr.").size(), 3u);
  EXPECT_EQ(kv.resolve_path("x.tsv"), dir_ / "x.tsv");
  EXPECT_EQ(code_of([] { data::KeyValueFile::parse("no equals sign\n"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([&] { kv.get_int("deepdr.flag", 0); }), ErrorCode::parse);
}

TEST_F(Layers, SymmetricToyFileMirrorsEveryEdge) {
  write_text(dir_ / "sim.tsv", "a\tb\t1\nb\tc\t2\n");
  write_text(dir_ / "m.conf", "layer.sim = sim.tsv\nlayer.sim.symmetric = true\n");
  const auto set = data::load_network_layers(dir_ / "m.conf");
  const auto& v = set.vocab(EntityKind::drug);
  const Matrix m = set.layer("sim").dense();
  const auto a = static_cast<Index>(v.index_of("a")), b = static_cast<Index>(v.index_of("b")),
             c = static_cast<Index>(v.index_of("c"));
  EXPECT_EQ(m(a, b), 1.0);
  EXPECT_EQ(m(b, a), 1.0);
  EXPECT_EQ(m(b, c), 2.0);
  EXPECT_EQ(m(c, b), 2.0);
  EXPECT_EQ(m(a, c), 0.0);
  EXPECT_EQ(v.ids(), (std::vector<std::string>{"a", "b", "c"}));
}

TEST_F(Layers, AsymmetricWeightsSymmetrizeByMaximum) {
  write_text(dir_ / "sim.tsv", "a\tb\t0.25\nb\ta\t0.75\n");
  write_text(dir_ / "m.conf", "layer.sim = sim.tsv\n");
  const auto set = data::load_network_layers(dir_ / "m.conf");
  const Matrix m = set.layer("sim").dense();
  EXPECT_EQ(m(0, 1), 0.75);
  EXPECT_EQ(m(1, 0), 0.75);
  EXPECT_LE(data::max_asymmetry(set.layer("sim").adjacency), 1e-12);
}

TEST_F(Layers, EmptyEdgeFileGivesZeroLayer) {
  write_text(dir_ / "drugs.tsv", "d1\tOne\nd2\tTwo\n");
  write_text(dir_ / "empty.tsv", "# nothing yet\n");
  write_text(dir_ / "m.conf", "vocab.drug = drugs.tsv\nlayer.empty = empty.tsv\n");
  const auto set = data::load_network_layers(dir_ / "m.conf");
  ASSERT_TRUE(set.has_layer("empty"));
  EXPECT_EQ(set.layer("empty").adjacency.rows(), 2);
  EXPECT_EQ(set.layer("empty").adjacency.nonZeros(), 0);
}

TEST_F(Layers, Errors) {
  write_text(dir_ / "drugs.tsv", "d1\nd2\n");
  write_text(dir_ / "neg.tsv", "d1\td2\t-1\n");
  write_text(dir_ / "dangling.tsv", "d1\td9\t1\n");
  write_text(dir_ / "conflict.tsv", "d1\td2\t1\nd1\td2\t2\n");
  write_text(dir_ / "repeat.tsv", "d1\td2\t1\nd1\td2\t1\n");
  auto load = [&](const std::string& file) {
    write_text(dir_ / "m.conf", "vocab.drug = drugs.tsv\nlayer.x = " + file + "\n");
    return data::load_network_layers(dir_ / "m.conf");
  };
  EXPECT_EQ(code_of([&] { load("neg.tsv"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { load("dangling.tsv"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { load("conflict.tsv"); }), ErrorCode::conflict);
  EXPECT_EQ(code_of([&] { load("missing.tsv"); }), ErrorCode::io);
  EXPECT_EQ(load("repeat.tsv").layer("x").adjacency.nonZeros(), 2);
}

TEST_F(Layers, DeepDrSchemaLoadsDeclaredSizes) {
  const auto fx = fixtures::write_deepdr_schema(dir_, 400, 3);
  const auto set = data::load_network_layers(fx.manifest);
  EXPECT_EQ(set.layers().size(), 10u);
  EXPECT_EQ(set.vocab(EntityKind::drug).size(), 1519u);
  EXPECT_EQ(set.vocab(EntityKind::disease).size(), 1229u);
  EXPECT_EQ(set.vocab(EntityKind::target).size(), 1025u);
  EXPECT_EQ(set.vocab(EntityKind::side_effect).size(), 12904u);
  for (const auto& layer : set.layers()) {
    EXPECT_EQ(layer.adjacency.rows(), static_cast<Index>(set.vocab(layer.row_kind).size())) << layer.name;
    EXPECT_EQ(layer.adjacency.cols(), static_cast<Index>(set.vocab(layer.col_kind).size())) << layer.name;
    if (layer.symmetric) {
      EXPECT_LE(data::max_asymmetry(layer.adjacency), 1e-12) << layer.name;
    }
  }
}

TEST_F(Layers, RoundTripKeepsVocabOrderAndEntries) {
  const auto fx = fixtures::write_deepdr_schema(dir_ / "in", 200, 11);
  const auto set = data::load_network_layers(fx.manifest);
  const auto again = data::load_network_layers(data::write_network_layers(set, dir_ / "out"));
  EXPECT_EQ(again.vocabs(), set.vocabs());
  ASSERT_EQ(again.layers().size(), set.layers().size());
  for (std::size_t i = 0; i < set.layers().size(); ++i) {
    const auto& a = set.layers()[i];
    const auto& b = again.layers()[i];
    EXPECT_EQ(a.name, b.name);
    EXPECT_EQ(a.symmetric, b.symmetric);
    EXPECT_EQ(a.adjacency.nonZeros(), b.adjacency.nonZeros());
    EXPECT_TRUE(a.dense() == b.dense()) << a.name;
  }
}

TEST_F(Kg, DuplicateTripleIsDropped) {
  write_text(dir_ / "meta.tsv", "a\tCompound\tA\nb\tDisease\tB\nc\tGene\tC\n");
  write_text(dir_ / "kg.tsv", "a\ttreats\tb\na\ttargets\tc\nc\tassociated_with\tb\na\ttreats\tb\n");
  const auto kg = data::load_knowledge_graph(dir_ / "kg.tsv", dir_ / "meta.tsv");
  EXPECT_EQ(kg.triple_count(), 3u);
  EXPECT_EQ(kg.relation_count(), 3u);
  EXPECT_EQ(kg.count_by_relation().at("treats"), 1u);
}

TEST_F(Kg, FourteenthEntityTypeIsRejected) {
  std::vector<std::string> declared;
  std::ostringstream meta;
  for (int i = 0; i < 13; ++i) {
    declared.push_back("Type" + std::to_string(i));
    meta << "e" << i << "\tType" << i << "\tE" << i << '\n';
  }
  meta << "e13\tType13\tE13\n";
  write_text(dir_ / "meta.tsv", meta.str());
  write_text(dir_ / "kg.tsv", "e0\tr\te13\n");
  data::KgLoadOptions opts;
  opts.declared_types = declared;
  EXPECT_EQ(code_of([&] { data::load_knowledge_graph(dir_ / "kg.tsv", dir_ / "meta.tsv", opts); }),
            ErrorCode::validation);
}

TEST_F(Kg, Errors) {
  write_text(dir_ / "meta.tsv", "a\tCompound\tA\nb\tDisease\tB\n");
  write_text(dir_ / "bad_cols.tsv", "a\ttreats\n");
  write_text(dir_ / "dangling.tsv", "a\ttreats\tz\n");
  write_text(dir_ / "empty.tsv", "# none\n");
  auto load = [&](const std::string& f) { data::load_knowledge_graph(dir_ / f, dir_ / "meta.tsv"); };
  EXPECT_EQ(code_of([&] { load("bad_cols.tsv"); }), ErrorCode::parse);
  EXPECT_EQ(code_of([&] { load("dangling.tsv"); }), ErrorCode::validation);
  EXPECT_EQ(code_of([&] { load("empty.tsv"); }), ErrorCode::validation);
}

TEST_F(Kg, MiniKgCountsEchoLedgerAndLineOracle) {
  const auto ledger = fixtures::write_mini_kg(dir_ / "kg.tsv", dir_ / "meta.tsv", 50, 4, 300, 5);
  const auto kg = data::load_knowledge_graph(dir_ / "kg.tsv", dir_ / "meta.tsv");
  EXPECT_EQ(kg.entity_count(), 50u);
  EXPECT_EQ(kg.relation_count(), 4u);
  EXPECT_EQ(kg.triple_count(), 300u);
  EXPECT_EQ(kg.triple_count(), ledger.unique_triples);
  EXPECT_EQ(kg.count_by_type(), ledger.per_type);
  EXPECT_EQ(kg.count_by_relation(), ledger.per_relation);
  EXPECT_GT(ledger.duplicates, 0u);
  EXPECT_GT(ledger.comments, 0u);

  std::ifstream in(dir_ / "kg.tsv");
  std::string line;
  std::size_t lines = 0, skipped = 0;
  std::set<std::string> distinct;
  while (std::getline(in, line)) {
    ++lines;
    if (line.empty() || line[0] == '#') {
      ++skipped;
      continue;
    }
    distinct.insert(line);
  }
  const std::size_t duplicates = lines - skipped - distinct.size();
  EXPECT_EQ(lines, ledger.lines);
  EXPECT_EQ(kg.triple_count(), lines - skipped - duplicates);
}

TEST_F(Kg, RoundTripIsStructurallyIdentical) {
  fixtures::write_mini_kg(dir_ / "kg.tsv", dir_ / "meta.tsv", 30, 3, 120, 9);
  const auto kg = data::load_knowledge_graph(dir_ / "kg.tsv", dir_ / "meta.tsv");
  data::write_knowledge_graph(kg, dir_ / "kg2.tsv", dir_ / "meta2.tsv");
  const auto again = data::load_knowledge_graph(dir_ / "kg2.tsv", dir_ / "meta2.tsv");
  ASSERT_EQ(again.entity_count(), kg.entity_count());
  for (std::size_t i = 0; i < kg.entity_count(); ++i) {
    EXPECT_EQ(again.entity(i).ref, kg.entity(i).ref);
    EXPECT_EQ(again.entity(i).type, kg.entity(i).type);
  }
  EXPECT_EQ(again.relations(), kg.relations());
  EXPECT_EQ(again.triples(), kg.triples());
}

TEST_F(Tables, SingleAtomMoleculeIsValid) {
  std::string atom = "mol\tm1\t1\t0\n";
  for (int i = 0; i < 78; ++i) atom += (i ? "\t" : "") + std::string(i == 3 ? "1" : "0");
  write_text(dir_ / "mol.tsv", atom + "\n");
  const auto mols = data::load_molecules(dir_ / "mol.tsv", [](EntityKind, std::string_view) { return true; });
  ASSERT_EQ(mols.size(), 1u);
  EXPECT_EQ(mols[0].atoms.rows(), 1);
  EXPECT_EQ(mols[0].atoms.cols(), 78);
  EXPECT_TRUE(mols[0].bonds.empty());
}

TEST_F(Tables, Errors) {
  const data::IdResolver any = [](EntityKind, std::string_view) { return true; };
  const data::IdResolver only_d1 = [](EntityKind, std::string_view id) { return id == "d1"; };
  write_text(dir_ / "feat.tsv", "x\t1\t2\t3\t4\t5\ny\t1\t2\t3\t4\t5\t6\n");
  EXPECT_EQ(code_of([&] { data::load_feature_table(dir_ / "feat.tsv", EntityKind::disease, any); }),
            ErrorCode::dimension_mismatch);
  write_text(dir_ / "records.tsv", "d2\tA01\tbg\tind\tS\n");
  EXPECT_EQ(code_of([&] { data::load_drug_records(dir_ / "records.tsv", only_d1); }), ErrorCode::validation);
  write_text(dir_ / "short.tsv", "mol\tm1\t1\t0\n0\t1\t0\n");
  EXPECT_EQ(code_of([&] { data::load_molecules(dir_ / "short.tsv", any); }), ErrorCode::dimension_mismatch);
  write_text(dir_ / "truncated.tsv", "mol\tm1\t2\t0\n");
  EXPECT_EQ(code_of([&] { data::load_molecules(dir_ / "truncated.tsv", any); }), ErrorCode::parse);
  write_text(dir_ / "prot.tsv", "t1\tACDZ\n");
  EXPECT_EQ(code_of([&] { data::load_proteins(dir_ / "prot.tsv", any); }), ErrorCode::validation);
  write_text(dir_ / "pairs.tsv", "a\tb\t2\n");
  EXPECT_EQ(code_of([&] { data::load_pairs(dir_ / "pairs.tsv"); }), ErrorCode::validation);
}

TEST_F(Tables, RoundTrips) {
  const auto fx = fixtures::write_service_fixture(dir_ / "in");
  const auto ds = data::load_dataset(fx.manifest);
  const data::IdResolver any = [](EntityKind, std::string_view) { return true; };
  const auto& f = ds.features.at(EntityKind::disease);
  data::write_feature_table(f, dir_ / "f.tsv");
  EXPECT_TRUE(data::load_feature_table(dir_ / "f.tsv", EntityKind::disease, any) == f);
  data::write_drug_records(ds.drug_records, dir_ / "r.tsv");
  EXPECT_EQ(data::load_drug_records(dir_ / "r.tsv", any), ds.drug_records);
  data::write_molecules(ds.molecules, dir_ / "m.tsv");
  EXPECT_EQ(data::load_molecules(dir_ / "m.tsv", any), ds.molecules);
  data::write_proteins(ds.proteins, dir_ / "p.tsv");
  EXPECT_EQ(data::load_proteins(dir_ / "p.tsv", any), ds.proteins);
  data::write_pairs(ds.dti_pairs, dir_ / "dti.tsv");
  EXPECT_EQ(data::load_pairs(dir_ / "dti.tsv"), ds.dti_pairs);
}

TEST_F(DatasetLoad, CountsEqualFixtureLedger) {
  const auto fx = fixtures::write_service_fixture(dir_);
  const auto ds = data::load_dataset(fx.manifest);
  EXPECT_EQ(data::dataset_counts(ds), fx.ledger);
}

TEST_F(DatasetLoad, ResolveEntityExamples) {
  const auto fx = fixtures::write_service_fixture(dir_);
  const auto ds = data::load_dataset(fx.manifest);
  const auto d = data::resolve_entity(ds.directory, "C0342731", EntityKind::disease);
  EXPECT_EQ(d.name, "Deficiency of mevalonate kinase");
  EXPECT_EQ(d.kind, EntityKind::disease);
  EXPECT_EQ(data::resolve_entity(ds.directory, "NR1H4", EntityKind::target).id, "9971");
  EXPECT_EQ(data::resolve_entity(ds.directory, "nr1h4", EntityKind::target).id, "9971");
  EXPECT_EQ(data::resolve_entity(ds.directory, "deficiency OF mevalonate kinase", EntityKind::disease).id,
            "C0342731");
  EXPECT_EQ(code_of([&] { data::resolve_entity(ds.directory, "zzz-unknown", EntityKind::disease); }),
            ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { data::resolve_entity(ds.directory, "c0342731", EntityKind::disease); }),
            ErrorCode::not_found);
  EXPECT_EQ(code_of([&] { data::resolve_entity(ds.directory, "C0342731", EntityKind::target); }),
            ErrorCode::not_found);
  try {
    data::resolve_entity(ds.directory, "periodic fever syndrome", EntityKind::disease);
    FAIL() << "expected an ambiguous-name error";
  } catch (const AmbiguousNameError& e) {
    EXPECT_EQ(e.code(), ErrorCode::ambiguous);
    EXPECT_EQ(e.candidates(), (std::vector<std::string>{"C9000028", "C9000029"}));
  }
}

TEST_F(DatasetLoad, FingerprintTracksVocabularyOrder) {
  const auto fx = fixtures::write_service_fixture(dir_);
  const std::string before = data::load_dataset(fx.manifest).fingerprint;
  EXPECT_EQ(data::load_dataset(fx.manifest).fingerprint, before);
  const fs::path vocab = dir_ / "vocab_drug.tsv";
  ASSERT_TRUE(fs::exists(vocab));
  std::ifstream in(vocab);
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  in.close();
  std::reverse(lines.begin(), lines.end());
  std::ofstream out(vocab);
  for (const auto& l : lines) out << l << '\n';
  out.close();
  EXPECT_NE(data::load_dataset(fx.manifest).fingerprint, before);
}
