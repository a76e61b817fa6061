#pragma once

#include "repositioner/fixtures/service.hpp"
#include "repositioner/service/api.hpp"

#include <cstdlib>
#include <filesystem>
#include <memory>
#include <string>
#include <unistd.h>

namespace repositioner::testing {

inline constexpr std::uint64_t kFixtureSeed = 7;

// Service fixture written to a scratch directory, every model kind trained
// once with a fixed seed and saved to an artifact store.
struct TrainedFixture {
  std::filesystem::path dir;
  fixtures::ServiceFixture files;
  std::shared_ptr<const data::Dataset> dataset;
  service::ArtifactStore store{""};
  std::shared_ptr<const service::RegistrySnapshot> snapshot;
};

inline std::filesystem::path scratch_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("repositioner-" + tag + "-" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

inline void train_all(const data::Dataset& ds, const std::filesystem::path& config, std::uint64_t seed,
                      const service::ArtifactStore& store) {
  const service::TrainOptions options{data::KeyValueFile::load(config), seed};
  for (service::ModelKind kind : service::kAllModelKinds) store.save(service::train_model(kind, ds, options)->bundle());
}

// Artifacts come from REPOSITIONER_TEST_FIXTURE (written once by the ctest
// setup step) when that directory holds them; otherwise every kind is trained
// here. The data files are cheap and always rewritten.
inline const TrainedFixture& trained_fixture() {
  static const TrainedFixture fx = [] {
    TrainedFixture f;
    f.dir = scratch_dir("service");
    f.files = fixtures::write_service_fixture(f.dir / "data");
    f.dataset = std::make_shared<const data::Dataset>(data::load_dataset(f.files.manifest));
    const char* prepared = std::getenv("REPOSITIONER_TEST_FIXTURE");
    if (prepared && *prepared && std::filesystem::exists(std::filesystem::path(prepared) / "artifacts/manifest.json")) {
      f.store = service::ArtifactStore(std::filesystem::path(prepared) / "artifacts");
    } else {
      f.store = service::ArtifactStore(f.dir / "artifacts");
      train_all(*f.dataset, f.files.config, kFixtureSeed, f.store);
    }
    f.snapshot = service::load_snapshot(f.dataset, f.store);
    return f;
  }();
  return fx;
}

}  // namespace repositioner::testing
