#include "repositioner/fixtures/kg.hpp"
#include "repositioner/kge/explain.hpp"
#include "repositioner/kge/rotate.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

using namespace repositioner;
using namespace repositioner::kge;
using data::EntityKind;
using data::IndexedTriple;

namespace {

RotateModel bare_model(Index entities, Index relations, Index dim, std::uint64_t seed) {
  Rng rng(seed);
  RotateModel m;
  for (Index i = 0; i < entities; ++i) m.entity_ids.push_back("e" + std::to_string(i));
  for (Index r = 0; r < relations; ++r) m.relations.push_back("r" + std::to_string(r));
  m.re = random_normal(entities, dim, 1.0, rng);
  m.im = random_normal(entities, dim, 1.0, rng);
  m.phase = random_uniform(relations, dim, -std::numbers::pi, std::numbers::pi, rng);
  return m;
}

double complex_oracle(const RotateModel& m, Index h, Index r, Index t) {
  double d = 0;
  for (Index c = 0; c < m.dim(); ++c) {
    const std::complex<double> hc(m.re(h, c), m.im(h, c)), tc(m.re(t, c), m.im(t, c));
    d += std::abs(hc * std::polar(1.0, m.phase(r, c)) - tc);
  }
  return d;
}

double oracle_loss(const RotateModel& m, const std::vector<IndexedTriple>& triples,
                   const std::vector<std::vector<IndexedTriple>>& negatives) {
  auto logsig = [](double x) { return std::log(1.0 / (1.0 + std::exp(-x))); };
  double total = 0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    const double dp = complex_oracle(m, static_cast<Index>(t.head), static_cast<Index>(t.relation),
                                     static_cast<Index>(t.tail));
    std::vector<double> dn;
    for (const auto& n : negatives[i])
      dn.push_back(complex_oracle(m, static_cast<Index>(n.head), static_cast<Index>(n.relation),
                                  static_cast<Index>(n.tail)));
    double z = 0;
    for (double d : dn) z += std::exp(-m.temperature * d);
    double neg = 0;
    for (double d : dn) neg += std::exp(-m.temperature * d) / z * logsig(d - m.gamma);
    total += -0.5 * logsig(m.gamma - dp) - 0.5 * neg;
  }
  return total / static_cast<double>(triples.size());
}

data::KnowledgeGraph small_kg() {
  std::vector<data::KgEntity> entities = {
      {{"D1", "aspirin", EntityKind::drug}, "Compound"},  {{"D2", "ibuprofen", EntityKind::drug}, "Compound"},
      {{"D3", "statin", EntityKind::drug}, "Compound"},   {{"S1", "pain", EntityKind::disease}, "Disease"},
      {{"S2", "fever", EntityKind::disease}, "Disease"},  {{"G1", "PTGS2", EntityKind::target}, "Gene"},
  };
  return data::KnowledgeGraph(entities, {{"D1", "treats", "S1"},
                                         {"D2", "treats", "S1"},
                                         {"D3", "treats", "S1"},
                                         {"D1", "treats", "S2"},
                                         {"D1", "targets", "G1"},
                                         {"G1", "associated_with", "S2"}});
}

}  // namespace

TEST(RotateDistance, IdentityRotationAndQuarterTurn) {
  RotateModel m = bare_model(2, 1, 5, 1);
  m.phase.setZero();
  m.re.row(1) = m.re.row(0);
  m.im.row(1) = m.im.row(0);
  EXPECT_EQ(m.distance(0, 0, 1), 0.0);

  RotateModel q;
  q.entity_ids = {"h", "i", "one"};
  q.relations = {"quarter"};
  q.re = Matrix(3, 1);
  q.im = Matrix(3, 1);
  q.re << 1, 0, 1;
  q.im << 0, 1, 0;
  q.phase = Matrix::Constant(1, 1, std::numbers::pi / 2);
  EXPECT_NEAR(rotate_distance(q, "h", "quarter", "i"), 0.0, 1e-15);
  EXPECT_NEAR(rotate_distance(q, "h", "quarter", "one"), std::sqrt(2.0), 1e-15);
  EXPECT_THROW(rotate_distance(q, "h", "half", "one"), Error);
  EXPECT_THROW(rotate_distance(q, "nobody", "quarter", "one"), Error);
}

TEST(RotateDistance, MatchesComplexOracle) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const RotateModel m = bare_model(6, 3, 4, seed);
    for (Index h = 0; h < 6; ++h)
      for (Index t = 0; t < 6; ++t)
        for (Index r = 0; r < 3; ++r)
          EXPECT_NEAR(m.distance(static_cast<std::size_t>(h), static_cast<std::size_t>(r), static_cast<std::size_t>(t)),
                      complex_oracle(m, h, r, t), 1e-12);
  }
}

TEST(RotateDistance, ZeroExactlyWhenTailIsRotatedHead) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    RotateModel m = bare_model(2, 1, 8, seed);
    for (Index c = 0; c < 8; ++c) {
      const auto rotated = std::complex<double>(m.re(0, c), m.im(0, c)) * std::polar(1.0, m.phase(0, c));
      m.re(1, c) = rotated.real();
      m.im(1, c) = rotated.imag();
    }
    EXPECT_LE(m.distance(0, 0, 1), 1e-12);
    m.im(1, static_cast<Index>(seed % 8)) += 1e-3;
    EXPECT_GT(m.distance(0, 0, 1), 1e-4);
  }
}

TEST(RotateLoss, TapeAndPlainMatchComplexOracle) {
  const auto f = fixtures::compositional_kg(1);
  RotateConfig cfg;
  cfg.dim = 6;
  cfg.negatives = 5;
  cfg.epochs = 0;
  cfg.temperature = 0.7;
  const RotateModel m = train_rotate(f.kg, cfg).model;
  Rng rng(3);
  const auto negatives = sample_negatives(f.kg, f.kg.triples(), 5, rng);
  const double oracle = oracle_loss(m, f.kg.triples(), negatives);
  EXPECT_NEAR(rotate_loss(m, f.kg.triples(), negatives), oracle, 1e-12);
  num::ParamSet params;
  params.add("re", m.re);
  params.add("im", m.im);
  params.add("phase", m.phase);
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  EXPECT_NEAR(rotate_batch_loss(tape, bound, m, f.kg.triples(), negatives).scalar(), oracle, 1e-12);
}

TEST(RotateLoss, GradientMatchesFiniteDifferences) {
  const auto f = fixtures::compositional_kg(2);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RotateConfig cfg;
    cfg.dim = 3;
    cfg.negatives = 3;
    cfg.epochs = 0;
    // Zero temperature keeps the negative weights uniform, so the held-constant
    // weights are the true derivative.
    cfg.temperature = 0.0;
    cfg.seed = seed;
    const RotateModel m = train_rotate(f.kg, cfg).model;
    Rng rng(seed);
    std::vector<IndexedTriple> batch(f.kg.triples().begin(), f.kg.triples().begin() + 8);
    const auto negatives = sample_negatives(f.kg, batch, 3, rng);
    num::ParamSet params;
    params.add("re", m.re);
    params.add("im", m.im);
    params.add("phase", m.phase);
    num::Objective obj = [&](const num::ParamSet& p, std::vector<Matrix>* g) {
      num::Tape tape;
      auto bound = num::bind(tape, p);
      auto loss = rotate_batch_loss(tape, bound, m, batch, negatives);
      if (g) {
        tape.backward(loss);
        *g = bound.grads(tape);
      }
      return loss.scalar();
    };
    EXPECT_LE(num::gradient_check(params, obj), 1e-4);
  }
}

TEST(TrainRotate, Validation) {
  const auto kg = small_kg();
  RotateConfig cfg;
  cfg.negatives = 0;
  EXPECT_THROW(train_rotate(kg, cfg), Error);
  cfg.negatives = 1;
  cfg.dim = 1;
  EXPECT_THROW(train_rotate(kg, cfg), Error);
  cfg.dim = 4;
  const std::vector<IndexedTriple> none;
  EXPECT_THROW(train_rotate(kg, cfg, &none), Error);
  EXPECT_THROW(data::KnowledgeGraph({{{"a", "a", EntityKind::drug}, "Compound"}}, {}), Error);
}

TEST(TrainRotate, CompositionalRecovery) {
  const auto f = fixtures::compositional_kg(4);
  RotateConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 4;
  const auto result = train_rotate(f.kg, cfg);
  const HitsReport hits = filtered_hits_at_k(result.model, f.test, f.all_triples(), 3);
  EXPECT_EQ(f.test.size(), 7u);
  EXPECT_GE(hits.hits, 0.8);
  for (std::size_t e = 1; e < result.history.size(); ++e) EXPECT_LE(result.history[e], result.history[e - 1]);
}

TEST(TrainRotate, DeterministicAndUnitModulus) {
  const auto f = fixtures::compositional_kg(5);
  RotateConfig cfg;
  cfg.dim = 8;
  cfg.seed = 9;
  for (int epochs = 1; epochs <= 4; ++epochs) {
    cfg.epochs = epochs;
    const auto a = train_rotate(f.kg, cfg), b = train_rotate(f.kg, cfg);
    EXPECT_EQ(a.model, b.model);
    EXPECT_TRUE(all_finite(a.model.re) && all_finite(a.model.im) && all_finite(a.model.phase));
    for (Index i = 0; i < a.model.phase.size(); ++i)
      EXPECT_LE(std::abs(std::abs(std::polar(1.0, a.model.phase(i))) - 1.0), 1e-15);
  }
}

TEST(RankCandidates, HeldOutTreatmentInTopThree) {
  const auto f = fixtures::treatment_kg(12, 3);
  RotateConfig cfg;
  cfg.dim = 32;
  cfg.epochs = 200;
  cfg.negatives = 8;
  const auto model = train_rotate(f.kg, cfg).model;
  ASSERT_EQ(f.test.size(), 1u);
  const auto& held = f.test[0];
  CandidateQuery q{f.kg.entity(held.tail).ref.id, "treats", EntityKind::drug, 3, true};
  const auto list = rank_candidates(model, f.kg, q);
  bool found = false;
  for (const auto& e : list.entries) found |= e.entity.id == f.kg.entity(held.head).ref.id;
  EXPECT_TRUE(found);
  EXPECT_TRUE(predict::ordering_holds(list.entries));
  EXPECT_EQ(list.query.kind, EntityKind::disease);
}

TEST(RankCandidates, LengthExclusionAndErrors) {
  const auto f = fixtures::treatment_kg(25, 1);
  RotateConfig cfg;
  cfg.dim = 4;
  cfg.epochs = 2;
  const auto model = train_rotate(f.kg, cfg).model;
  // Query in the tail slot of targets: gene -> drugs.
  auto list = rank_candidates(model, f.kg, {"G03", "targets", EntityKind::drug, 20, false});
  EXPECT_EQ(list.entries.size(), 20u);
  list = rank_candidates(model, f.kg, {"G03", "targets", EntityKind::drug, 100, true});
  EXPECT_EQ(list.entries.size(), 24u);
  for (const auto& e : list.entries) EXPECT_NE(e.entity.id, "DB03");
  EXPECT_THROW(rank_candidates(model, f.kg, {"nobody", "targets", EntityKind::drug, 5, true}), Error);
  EXPECT_THROW(rank_candidates(model, f.kg, {"G03", "treats", EntityKind::drug, 5, true}), Error);
  EXPECT_THROW(rank_candidates(model, f.kg, {"G03", "cures", EntityKind::drug, 5, true}), Error);

  const auto kg = small_kg();
  const auto small = train_rotate(kg, cfg).model;
  EXPECT_TRUE(rank_candidates(small, kg, {"S1", "treats", EntityKind::drug, 10, true}).entries.empty());
  EXPECT_EQ(rank_candidates(small, kg, {"S1", "treats", EntityKind::drug, 10, false}).entries.size(), 3u);
  EXPECT_THROW(rank_candidates(model, kg, {"S1", "treats", EntityKind::drug, 5, true}), Error);
}

TEST(RankCandidates, InvariantUnderMonotoneTransform) {
  const auto f = fixtures::treatment_kg(15, 2);
  RotateConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 5;
  const auto model = train_rotate(f.kg, cfg).model;
  for (const auto disease : f.kg.entities_of_kind(EntityKind::disease)) {
    const auto list = rank_candidates(model, f.kg, {f.kg.entity(disease).ref.id, "treats", EntityKind::drug, 100, false});
    std::vector<data::EntityRef> drugs;
    std::vector<double> transformed;
    for (auto d : f.kg.entities_of_kind(EntityKind::drug)) {
      drugs.push_back(f.kg.entity(d).ref);
      const double score = -model.distance(d, f.kg.relation_index("treats"), disease);
      transformed.push_back(std::exp(0.3 * score) + 2.0);
    }
    const auto other = predict::rank_entities(
        drugs, Eigen::Map<const Vector>(transformed.data(), static_cast<Index>(transformed.size())), 100);
    ASSERT_EQ(other.size(), list.entries.size());
    for (std::size_t i = 0; i < other.size(); ++i) EXPECT_EQ(other[i].entity.id, list.entries[i].entity.id);
  }
}

namespace {

// Exhaustive depth-first enumeration of simple undirected paths.
void all_paths(const data::KnowledgeGraph& kg, std::size_t u, std::size_t goal, int budget,
               std::vector<std::size_t>& nodes, std::vector<std::size_t>& edges,
               std::vector<std::vector<std::size_t>>& out) {
  if (u == goal) {
    out.push_back(edges);
    return;
  }
  if (budget == 0) return;
  for (std::size_t ti = 0; ti < kg.triple_count(); ++ti) {
    const auto& t = kg.triples()[ti];
    std::size_t v;
    if (t.head == u && t.tail != u) {
      v = t.tail;
    } else if (t.tail == u && t.head != u) {
      v = t.head;
    } else {
      continue;
    }
    if (std::find(nodes.begin(), nodes.end(), v) != nodes.end()) continue;
    nodes.push_back(v);
    edges.push_back(ti);
    all_paths(kg, v, goal, budget - 1, nodes, edges, out);
    nodes.pop_back();
    edges.pop_back();
  }
}

std::vector<std::vector<std::size_t>> oracle_paths(const data::KnowledgeGraph& kg, const std::string& a,
                                                   const std::string& b, int hops, int keep) {
  std::vector<std::size_t> nodes{kg.entity_index(a)}, edges;
  std::vector<std::vector<std::size_t>> out;
  all_paths(kg, nodes[0], kg.entity_index(b), hops, nodes, edges, out);
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.size() != y.size() ? x.size() < y.size() : x < y;
  });
  if (out.size() > static_cast<std::size_t>(keep)) out.resize(static_cast<std::size_t>(keep));
  return out;
}

std::vector<std::vector<std::size_t>> as_triples(const ExplanationSubgraph& g) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& p : g.paths) {
    std::vector<std::size_t> seq;
    for (const auto& s : p) seq.push_back(g.edges[s.edge].triple);
    out.push_back(seq);
  }
  return out;
}

void expect_closed(const data::KnowledgeGraph& kg, const ExplanationSubgraph& g, const std::string& a,
                   const std::string& b, int hops) {
  std::set<std::string> nodes;
  for (const auto& n : g.nodes) nodes.insert(n.id);
  for (const auto& e : g.edges) {
    EXPECT_TRUE(nodes.count(e.head) && nodes.count(e.tail));
    const data::Triple t = kg.triple(e.triple);
    EXPECT_TRUE(t.head == e.head && t.relation == e.relation && t.tail == e.tail);
  }
  for (const auto& p : g.paths) {
    ASSERT_FALSE(p.empty());
    EXPECT_LE(p.size(), static_cast<std::size_t>(hops));
    std::string at = a;
    std::set<std::string> visited{a};
    for (const auto& s : p) {
      const auto& e = g.edges[s.edge];
      EXPECT_EQ(s.forward ? e.head : e.tail, at);
      at = s.forward ? e.tail : e.head;
      EXPECT_TRUE(visited.insert(at).second) << "path revisits " << at;
    }
    EXPECT_EQ(at, b);
  }
}

}  // namespace

TEST(ExtractPaths, DirectLinkAndDisconnected) {
  std::vector<data::KgEntity> entities = {{{"D1", "d", EntityKind::drug}, "Compound"},
                                          {{"S1", "s", EntityKind::disease}, "Disease"},
                                          {{"D2", "d2", EntityKind::drug}, "Compound"},
                                          {{"S2", "s2", EntityKind::disease}, "Disease"}};
  const data::KnowledgeGraph kg(entities, {{"D1", "treats", "S1"}, {"D2", "treats", "S2"}});
  const auto direct = extract_paths(kg, "D1", "S1", 3, 5);
  ASSERT_EQ(direct.paths.size(), 1u);
  EXPECT_EQ(direct.paths[0].size(), 1u);
  EXPECT_TRUE(direct.paths[0][0].forward);
  const auto reverse = extract_paths(kg, "S1", "D1", 3, 5);
  ASSERT_EQ(reverse.paths.size(), 1u);
  EXPECT_FALSE(reverse.paths[0][0].forward);
  const auto none = extract_paths(kg, "D1", "S2", 4, 5);
  EXPECT_TRUE(none.paths.empty() && none.nodes.empty() && none.edges.empty());
  EXPECT_THROW(extract_paths(kg, "D1", "S9", 3, 5), Error);
  EXPECT_THROW(extract_paths(kg, "D1", "S1", 0, 5), Error);
  EXPECT_THROW(extract_paths(kg, "D1", "S1", 3, 0), Error);
}

TEST(ExtractPaths, SixNodeFixtureMatchesExhaustiveOracle) {
  // Paths D->S within 3 hops: D-S, D-A-S, D-B-C-S. The detour D-B-C-F-S needs
  // four hops.
  std::vector<data::KgEntity> entities;
  for (const char* id : {"D", "A", "B", "C", "S", "F"}) entities.push_back({{id, id, EntityKind::other}, "Thing"});
  const data::KnowledgeGraph kg(entities, {{"D", "treats", "S"},
                                           {"D", "binds", "A"},
                                           {"S", "linked", "A"},
                                           {"D", "binds", "B"},
                                           {"B", "next", "C"},
                                           {"C", "next", "S"},
                                           {"C", "next", "F"},
                                           {"F", "next", "S"}});
  const auto g = extract_paths(kg, "D", "S", 3, 10);
  const auto expected = oracle_paths(kg, "D", "S", 3, 10);
  ASSERT_EQ(expected.size(), 3u);
  EXPECT_EQ(as_triples(g), expected);
  expect_closed(kg, g, "D", "S", 3);
  EXPECT_EQ(g.nodes.front().id, "D");
  EXPECT_EQ(g.nodes.size(), 5u);
  for (const auto& n : g.nodes) EXPECT_NE(n.id, "F");
  EXPECT_EQ(as_triples(extract_paths(kg, "D", "S", 4, 10)), oracle_paths(kg, "D", "S", 4, 10));
  EXPECT_EQ(extract_paths(kg, "D", "S", 4, 10).paths.size(), 4u);
}

TEST(ExtractPaths, RandomGraphsMatchOracleAndStayClosed) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    Rng rng(seed);
    std::vector<data::KgEntity> entities;
    for (int i = 0; i < 9; ++i) entities.push_back({{"n" + std::to_string(i), "", EntityKind::other}, "Thing"});
    std::vector<data::Triple> triples;
    std::uniform_int_distribution<int> node(0, 8), rel(0, 2);
    for (int k = 0; k < 16; ++k)
      triples.push_back({"n" + std::to_string(node(rng)), "r" + std::to_string(rel(rng)), "n" + std::to_string(node(rng))});
    const data::KnowledgeGraph kg(entities, triples);
    for (int hops : {1, 2, 3, 4})
      for (int keep : {1, 3, 50}) {
        const auto g = extract_paths(kg, "n0", "n5", hops, keep);
        EXPECT_EQ(as_triples(g), oracle_paths(kg, "n0", "n5", hops, keep)) << seed << " " << hops << " " << keep;
        expect_closed(kg, g, "n0", "n5", hops);
      }
  }
}

namespace {

data::LayeredNetworkSet similarity_set(const Matrix& w) {
  data::LayeredNetworkSet set;
  data::Vocabulary drugs(EntityKind::drug);
  for (Index i = 0; i < w.rows(); ++i) drugs.add("DB" + std::to_string(i), "drug " + std::to_string(i));
  set.add_vocabulary(drugs);
  for (const auto& name : kSimilarityLayers) {
    data::NetworkLayer layer;
    layer.name = name;
    layer.symmetric = true;
    layer.adjacency = w.sparseView();
    set.add_layer(layer);
  }
  return set;
}

}  // namespace

TEST(TopSimilarDrugs, TruncationSelfExclusionAndSortOracle) {
  Rng rng(7);
  Matrix w = random_uniform(30, 30, 0.0, 1.0, rng);
  w = (w + w.transpose()).eval();
  w(4, 4) = 100.0;
  w.row(2).setZero();
  w.col(2).setZero();
  w(2, 5) = w(5, 2) = 0.5;
  w(2, 7) = w(7, 2) = 0.9;
  w(2, 9) = w(9, 2) = 0.5;
  w(2, 2) = 1.0;
  const auto set = similarity_set(w);
  const auto sparse = top_similar_drugs(set, "DB2", 20);
  ASSERT_EQ(sparse.size(), 5u);
  for (const auto& [name, list] : sparse) {
    ASSERT_EQ(list.size(), 3u);
    EXPECT_EQ(list[0].entity.id, "DB7");
    EXPECT_EQ(list[1].entity.id, "DB5");
    EXPECT_EQ(list[2].entity.id, "DB9");
  }
  const auto full = top_similar_drugs(set, "DB4", 20);
  std::vector<std::pair<double, std::string>> oracle;
  for (Index j = 0; j < 30; ++j)
    if (j != 4) oracle.emplace_back(-w(4, j), "DB" + std::to_string(j));
  std::sort(oracle.begin(), oracle.end());
  for (const auto& [name, list] : full) {
    ASSERT_EQ(list.size(), 20u);
    for (std::size_t i = 0; i < 20; ++i) {
      EXPECT_EQ(list[i].entity.id, oracle[i].second);
      EXPECT_EQ(list[i].score, -oracle[i].first);
    }
  }
  EXPECT_THROW(top_similar_drugs(set, "DB99", 20), Error);
  EXPECT_THROW(top_similar_drugs(set, "DB1", 20, {"therapeutic", "side-effect"}), Error);
}
