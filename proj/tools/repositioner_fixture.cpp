// Writes the synthetic datasets used by the tests and the examples in the
// README.
#include "repositioner/fixtures/service.hpp"
#include "repositioner/service/models.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace repositioner;

namespace {

void write_ledger(const fs::path& path, const std::map<std::string, std::size_t>& ledger) {
  std::ofstream out(path);
  for (const auto& [key, value] : ledger) out << key << '\t' << value << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Synthetic dataset writer.", "repositioner-fixture");
  app.require_subcommand(1);

  fs::path service_dir;
  std::uint64_t seed = 17;
  std::uint64_t train_seed = 7;
  bool train = false;
  CLI::App* service = app.add_subcommand("service", "DeepDR-shaped dataset with every service input");
  service->add_option("dir", service_dir, "output directory")->required();
  service->add_option("--seed", seed, "data seed")->capture_default_str();
  service->add_flag("--train", train, "also train every model into <dir>/artifacts");
  service->add_option("--train-seed", train_seed, "training seed")->capture_default_str();

  fs::path schema_dir;
  std::size_t edges = 2000;
  CLI::App* schema = app.add_subcommand("deepdr-schema", "ten layers with the original DeepDR node counts");
  schema->add_option("dir", schema_dir, "output directory")->required();
  schema->add_option("--edges", edges, "edges per layer")->capture_default_str();
  schema->add_option("--seed", seed, "data seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*service) {
      fs::create_directories(service_dir);
      const fixtures::ServiceFixture fx = fixtures::write_service_fixture(service_dir, seed);
      write_ledger(service_dir / "ledger.tsv", fx.ledger);
      std::cout << fx.manifest.string() << '\n';
      if (train) {
        const data::Dataset ds = data::load_dataset(fx.manifest);
        const service::ArtifactStore store(service_dir / "artifacts");
        const service::TrainOptions options{data::KeyValueFile::load(fx.config), train_seed};
        for (service::ModelKind kind : service::kAllModelKinds) {
          const service::ArtifactEntry e = store.save(service::train_model(kind, ds, options)->bundle());
          std::cout << e.kind << '\t' << e.version << '\n';
        }
      }
    } else if (*schema) {
      fs::create_directories(schema_dir);
      const fixtures::SchemaFixture fx = fixtures::write_deepdr_schema(schema_dir, edges, seed);
      write_ledger(schema_dir / "ledger.tsv", fx.ledger);
      std::cout << fx.manifest.string() << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
