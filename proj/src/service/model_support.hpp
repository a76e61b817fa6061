#pragma once

#include "repositioner/numerics/params.hpp"
#include "repositioner/service/models.hpp"

#include <memory>
#include <string>
#include <vector>

namespace repositioner::service::detail {

// Reads `<kind>.<key>` from a config file and records every value it hands
// out, so the effective hyperparameters travel with the artifact.
class Section {
 public:
  Section(const data::KeyValueFile& config, std::string kind) : config_(config), prefix_(std::move(kind) + ".") {}

  long long get_int(const std::string& key, long long fallback);
  double get_double(const std::string& key, double fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get(const std::string& key, const std::string& fallback);
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::string> get_list(const std::string& key, const std::vector<std::string>& fallback);

  const std::vector<std::pair<std::string, std::string>>& echo() const { return echo_; }

 private:
  void record(const std::string& key, const std::string& value);

  const data::KeyValueFile& config_;
  std::string prefix_;
  std::vector<std::pair<std::string, std::string>> echo_;
};

// Config view over a bundle's echo, for rebuilding at restore time.
data::KeyValueFile config_from_bundle(const ModelBundle& bundle);

ModelBundle start_bundle(ModelKind kind, const data::Dataset& dataset, const Section& section);

void put_params(ModelBundle& bundle, const std::string& prefix, const num::ParamSet& params);
num::ParamSet get_params(const ModelBundle& bundle, const std::string& prefix);

std::vector<data::EntityRef> refs(const data::Vocabulary& vocab);
std::size_t column_of(const data::Vocabulary& vocab, const data::EntityRef& query);

// Square layers over `kind`, symmetrized by max(w_ij, w_ji), as dense matrices.
std::vector<Matrix> square_matrices(const data::LayeredNetworkSet& networks, data::EntityKind kind);

std::unique_ptr<TrainedModel> train_deepdr(const data::Dataset&, Section&, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_hetdr(const data::Dataset&, Section&, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_deepdtnet(const data::Dataset&, Section&, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_aopedf(const data::Dataset&, Section&, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_kge(ModelKind kind, const data::Dataset&, Section&, std::uint64_t seed);
std::unique_ptr<TrainedModel> train_kgmtl(const data::Dataset&, Section&, std::uint64_t seed);

std::unique_ptr<TrainedModel> restore_deepdr(const ModelBundle&, const data::Dataset&);
std::unique_ptr<TrainedModel> restore_hetdr(const ModelBundle&, const data::Dataset&);
std::unique_ptr<TrainedModel> restore_deepdtnet(const ModelBundle&, const data::Dataset&);
std::unique_ptr<TrainedModel> restore_aopedf(const ModelBundle&, const data::Dataset&);
std::unique_ptr<TrainedModel> restore_kge(const ModelBundle&, const data::Dataset&);
std::unique_ptr<TrainedModel> restore_kgmtl(const ModelBundle&, const data::Dataset&);

}  // namespace repositioner::service::detail
