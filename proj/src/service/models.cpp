#include "model_support.hpp"

#include <algorithm>
#include <sstream>

namespace repositioner::service {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::deepdr: return "deepdr";
    case ModelKind::hetdr: return "hetdr";
    case ModelKind::diskge: return "diskge";
    case ModelKind::deepdtnet: return "deepdtnet";
    case ModelKind::aopedf: return "aopedf";
    case ModelKind::tarkge: return "tarkge";
    case ModelKind::kgmtl: return "kgmtl";
  }
  return "unknown";
}

std::string_view to_string(Center center) {
  return center == Center::disease_centric ? "disease-centric" : "target-centric";
}

std::string_view to_string(ExplanationShape shape) {
  return shape == ExplanationShape::paths ? "paths" : "similarity";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "rotate") return ModelKind::diskge;
  for (ModelKind k : kAllModelKinds)
    if (to_string(k) == name) return k;
  fail(ErrorCode::invalid_argument, "unknown model kind '" + std::string(name) + "'");
}

Center parse_center(std::string_view name) {
  if (name == "disease-centric") return Center::disease_centric;
  if (name == "target-centric") return Center::target_centric;
  fail(ErrorCode::invalid_argument, "unknown service center '" + std::string(name) + "'");
}

Center center_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::deepdr:
    case ModelKind::hetdr:
    case ModelKind::diskge: return Center::disease_centric;
    default: return Center::target_centric;
  }
}

data::EntityKind query_kind(Center center) {
  return center == Center::disease_centric ? data::EntityKind::disease : data::EntityKind::target;
}

ExplanationShape explanation_of(ModelKind kind) {
  switch (kind) {
    case ModelKind::diskge:
    case ModelKind::tarkge:
    case ModelKind::kgmtl: return ExplanationShape::paths;
    default: return ExplanationShape::similarity;
  }
}

std::unique_ptr<TrainedModel> train_model(ModelKind kind, const data::Dataset& dataset, const TrainOptions& options) {
  detail::Section section(options.config, std::string(to_string(kind)));
  switch (kind) {
    case ModelKind::deepdr: return detail::train_deepdr(dataset, section, options.seed);
    case ModelKind::hetdr: return detail::train_hetdr(dataset, section, options.seed);
    case ModelKind::deepdtnet: return detail::train_deepdtnet(dataset, section, options.seed);
    case ModelKind::aopedf: return detail::train_aopedf(dataset, section, options.seed);
    case ModelKind::diskge:
    case ModelKind::tarkge: return detail::train_kge(kind, dataset, section, options.seed);
    case ModelKind::kgmtl: return detail::train_kgmtl(dataset, section, options.seed);
  }
  fail(ErrorCode::unsupported, "unsupported model kind");
}

std::unique_ptr<TrainedModel> restore_model(const ModelBundle& bundle, const data::Dataset& dataset) {
  const ModelKind kind = parse_model_kind(bundle.kind);
  require(bundle.fingerprint == dataset.fingerprint, ErrorCode::fingerprint,
          "model '" + bundle.kind + "' was trained on vocabularies " + bundle.fingerprint.substr(0, 12) +
              " but the loaded data has " + dataset.fingerprint.substr(0, 12));
  switch (kind) {
    case ModelKind::deepdr: return detail::restore_deepdr(bundle, dataset);
    case ModelKind::hetdr: return detail::restore_hetdr(bundle, dataset);
    case ModelKind::deepdtnet: return detail::restore_deepdtnet(bundle, dataset);
    case ModelKind::aopedf: return detail::restore_aopedf(bundle, dataset);
    case ModelKind::diskge:
    case ModelKind::tarkge: return detail::restore_kge(bundle, dataset);
    case ModelKind::kgmtl: return detail::restore_kgmtl(bundle, dataset);
  }
  fail(ErrorCode::unsupported, "unsupported model kind");
}

namespace detail {

void Section::record(const std::string& key, const std::string& value) {
  for (auto& [k, v] : echo_)
    if (k == prefix_ + key) {
      v = value;
      return;
    }
  echo_.emplace_back(prefix_ + key, value);
}

long long Section::get_int(const std::string& key, long long fallback) {
  const long long v = config_.get_int(prefix_ + key, fallback);
  record(key, std::to_string(v));
  return v;
}

double Section::get_double(const std::string& key, double fallback) {
  const double v = config_.get_double(prefix_ + key, fallback);
  std::ostringstream s;
  s.precision(17);
  s << v;
  record(key, s.str());
  return v;
}

bool Section::get_bool(const std::string& key, bool fallback) {
  const bool v = config_.get_bool(prefix_ + key, fallback);
  record(key, v ? "true" : "false");
  return v;
}

std::string Section::get(const std::string& key, const std::string& fallback) {
  std::string v = config_.get_or(prefix_ + key, fallback);
  record(key, v);
  return v;
}

std::vector<double> Section::get_doubles(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> out = fallback;
  if (auto raw = config_.get(prefix_ + key)) {
    out.clear();
    std::stringstream in(*raw);
    std::string item;
    while (std::getline(in, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stod(item, &used));
        require(item.find_first_not_of(" \t", used) == std::string::npos, ErrorCode::parse, "trailing characters");
      } catch (const std::exception&) {
        fail(ErrorCode::parse, "key '" + prefix_ + key + "' is not a number list: '" + *raw + "'");
      }
    }
  }
  std::ostringstream s;
  s.precision(17);
  for (std::size_t i = 0; i < out.size(); ++i) s << (i ? "," : "") << out[i];
  record(key, s.str());
  return out;
}

std::vector<std::string> Section::get_list(const std::string& key, const std::vector<std::string>& fallback) {
  std::vector<std::string> out = fallback;
  if (auto raw = config_.get(prefix_ + key)) {
    out.clear();
    std::stringstream in(*raw);
    std::string item;
    while (std::getline(in, item, ',')) {
      const auto b = item.find_first_not_of(" \t"), e = item.find_last_not_of(" \t");
      if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
  }
  std::string joined;
  for (std::size_t i = 0; i < out.size(); ++i) joined += (i ? "," : "") + out[i];
  record(key, joined);
  return out;
}

data::KeyValueFile config_from_bundle(const ModelBundle& bundle) {
  data::KeyValueFile out;
  for (const auto& [k, v] : bundle.config) out.set(k, v);
  return out;
}

ModelBundle start_bundle(ModelKind kind, const data::Dataset& dataset, const Section& section) {
  ModelBundle b;
  b.kind = std::string(to_string(kind));
  b.center = std::string(to_string(center_of(kind)));
  b.fingerprint = dataset.fingerprint;
  b.config = section.echo();
  return b;
}

void put_params(ModelBundle& bundle, const std::string& prefix, const num::ParamSet& params) {
  for (std::size_t i = 0; i < params.size(); ++i) bundle.put(prefix + params.names()[i], params.values()[i]);
}

num::ParamSet get_params(const ModelBundle& bundle, const std::string& prefix) {
  num::ParamSet out;
  for (const auto& [name, value] : bundle.tensors)
    if (name.rfind(prefix, 0) == 0) out.add(name.substr(prefix.size()), value);
  return out;
}

std::vector<data::EntityRef> refs(const data::Vocabulary& vocab) {
  std::vector<data::EntityRef> out;
  out.reserve(vocab.size());
  for (std::size_t i = 0; i < vocab.size(); ++i) out.push_back(vocab.ref(i));
  return out;
}

std::size_t column_of(const data::Vocabulary& vocab, const data::EntityRef& query) {
  const auto index = vocab.find(query.id);
  require(index.has_value(), ErrorCode::not_found,
          std::string(data::to_string(vocab.kind())) + " '" + query.id + "' is not covered by this model");
  return *index;
}

std::vector<Matrix> square_matrices(const data::LayeredNetworkSet& networks, data::EntityKind kind) {
  std::vector<Matrix> out;
  for (const auto* layer : networks.square_layers(kind)) {
    const Matrix a = layer->dense();
    out.push_back(a.cwiseMax(a.transpose()));
  }
  return out;
}

}  // namespace detail
}  // namespace repositioner::service
