#pragma once

#include "repositioner/data/knowledge_graph.hpp"
#include "repositioner/data/tables.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace repositioner::fixtures {

// `kg` holds every entity but only the training triples; `test` is indexed
// against it.
struct KgSplit {
  data::KnowledgeGraph kg;
  std::vector<data::IndexedTriple> test;

  std::vector<data::IndexedTriple> all_triples() const;
};

// Ten chains x0..x4 of five entities each (50 total). r1 links x0->x1 and
// x2->x3, r2 links x1->x2 and x3->x4, r3 closes each triangle (x0->x2,
// x2->x4), r4 joins x4 of one chain to x0 of the next. A tenth of all triples
// is held out, drawn only from r3 and at most one per triangle.
KgSplit compositional_kg(std::uint64_t seed);

// `n` drug/gene/disease triads: drug_i targets gene_i, gene_i
// associated_with disease_i, drug_i treats disease_i. One treats triple is
// held out.
KgSplit treatment_kg(int n, std::uint64_t seed);

// Thirty-entity KG of ten drugs DBxx, ten genes Gxx and ten diseases Sxx
// split into two planted groups by index parity. Each drug has a molecule
// (same id) whose atom features mark its group; each gene has a protein
// sequence (same id) drawn from a group-specific residue set. DTI and CPI
// pairs cover every drug x gene, labeled 1 within a group.
struct MtlFixture {
  data::KnowledgeGraph kg;
  std::vector<data::LabeledPair> dti;
  std::vector<data::LabeledPair> cpi;
  std::vector<data::MoleculeGraph> molecules;
  std::vector<data::ProteinSequence> proteins;
};
MtlFixture mtl_fixture(std::uint64_t seed);

// Ledger of a written mini knowledge graph.
struct MiniKgLedger {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t unique_triples = 0;
  std::size_t lines = 0;       // total lines in the triples file
  std::size_t comments = 0;    // comment and blank lines
  std::size_t duplicates = 0;  // repeated triple lines
  std::map<std::string, std::size_t> per_type;
  std::map<std::string, std::size_t> per_relation;
};

// Writes triples/metadata files for a random graph with the given sizes,
// sprinkling comment lines and duplicate rows.
MiniKgLedger write_mini_kg(const std::filesystem::path& triples, const std::filesystem::path& metadata,
                           std::size_t entities, std::size_t relations, std::size_t triples_count,
                           std::uint64_t seed);

}  // namespace repositioner::fixtures
