#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace repositioner::fixtures {

// Small DeepDR-shaped dataset with every input the service reads: ten
// network layers, a knowledge graph over the same ids, disease features,
// drug records, molecules, proteins, DTI/CPI pairs and a training config.
//
// Drugs DB00001..DB00040, diseases (C0342731 "Deficiency of mevalonate
// kinase" first, then C9000002..C9000030) and targets (9971 "NR1H4" first)
// fall into four planted groups by index modulo 4; links are dense inside a
// group and sparse across groups. Fixed quirks:
//   - DB00039 has no drug record;
//   - DB00040 has no edges in the go-cc and go-mf layers;
//   - C9000028 and C9000029 share the name "Periodic fever syndrome";
//   - C9000030 links only to gene 99999 (ORPHAN1), which appears in the
//     knowledge graph alone, so no drug reaches it.
struct ServiceFixture {
  std::filesystem::path manifest;
  std::filesystem::path config;
  // Expected `dataset_counts` output, tallied while writing.
  std::map<std::string, std::size_t> ledger;
  std::map<std::string, int> group;  // planted group per drug, disease and target id
};

ServiceFixture write_service_fixture(const std::filesystem::path& dir, std::uint64_t seed = 17);

// Ten-layer manifest with the node counts of the original DeepDR release
// (1519 drugs, 1229 diseases, 1025 targets, 12904 side effects) and sparse
// random edges; `edges_per_layer` bounds the file sizes.
struct SchemaFixture {
  std::filesystem::path manifest;
  std::map<std::string, std::size_t> ledger;
};

SchemaFixture write_deepdr_schema(const std::filesystem::path& dir, std::size_t edges_per_layer, std::uint64_t seed);

}  // namespace repositioner::fixtures
