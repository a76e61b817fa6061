#include "repositioner/service/api.hpp"

#include "json.hpp"

#include <algorithm>
#include <charconv>

namespace repositioner::service {

using json = nlohmann::ordered_json;
using data::EntityKind;
using data::EntityRef;

namespace {

struct HttpError {
  int status;
  std::string code;
  std::string message;
  json candidates = json::array();
};

ApiResponse respond(int status, const json& body) { return {status, body.dump(2) + "\n"}; }

ApiResponse error_response(const HttpError& e) {
  return respond(e.status, {{"error", {{"code", e.code}, {"message", e.message}, {"candidates", e.candidates}}}});
}

json entity_json(const EntityRef& e) {
  return {{"id", e.id}, {"name", e.name}, {"kind", std::string(data::to_string(e.kind))}};
}

json ranked_entries_json(const std::vector<predict::RankedEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) out.push_back({{"id", e.entity.id}, {"name", e.entity.name}, {"score", e.score}});
  return out;
}

json similarity_json(const kge::SimilarityMap& map) {
  json out = json::object();
  for (const auto& [layer, entries] : map) out[layer] = ranked_entries_json(entries);
  return out;
}

// Runs a handler, mapping library errors onto HTTP statuses.
template <typename F>
ApiResponse guarded(const data::Dataset* dataset, F&& handler) {
  try {
    return handler();
  } catch (const HttpError& e) {
    return error_response(e);
  } catch (const AmbiguousNameError& e) {
    HttpError h{422, "ambiguous", e.what()};
    for (const auto& id : e.candidates()) {
      json c = {{"id", id}};
      if (dataset)
        for (EntityKind kind : dataset->directory.kinds())
          if (const auto& v = dataset->directory.of(kind); v.contains(id)) {
            c["name"] = v.name(v.index_of(id));
            break;
          }
      h.candidates.push_back(c);
    }
    return error_response(h);
  } catch (const Error& e) {
    switch (e.code()) {
      case ErrorCode::not_found: return error_response({404, "not_found", e.what()});
      case ErrorCode::invalid_argument:
      case ErrorCode::parse: return error_response({400, "invalid_argument", e.what()});
      default: return error_response({500, std::string(to_string(e.code())), e.what()});
    }
  } catch (const std::exception& e) {
    return error_response({500, "internal", e.what()});
  }
}

const std::string* param(const QueryParams& q, const std::string& key) {
  const auto it = q.find(key);
  return it == q.end() ? nullptr : &it->second;
}

const std::string& required_param(const QueryParams& q, const std::string& key) {
  const std::string* v = param(q, key);
  if (!v || v->empty()) throw HttpError{400, "invalid_argument", "missing query parameter '" + key + "'"};
  return *v;
}

long long int_param(const QueryParams& q, const std::string& key, long long fallback) {
  const std::string* v = param(q, key);
  if (!v) return fallback;
  long long out = 0;
  const auto [end, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
  if (ec != std::errc() || end != v->data() + v->size())
    throw HttpError{400, "invalid_argument", "query parameter '" + key + "' must be an integer"};
  return out;
}

ModelKind model_param(const std::string& name) {
  try {
    return parse_model_kind(name);
  } catch (const Error&) {
    throw HttpError{400, "unsupported_model", "unknown model kind '" + name + "'"};
  }
}

EntityRef resolve(const data::Dataset& ds, std::string_view query, EntityKind kind) {
  const auto kinds = ds.directory.kinds();
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw HttpError{404, "not_found", "no " + std::string(data::to_string(kind)) + " entities are loaded"};
  return data::resolve_entity(ds.directory, query, kind);
}

}  // namespace

Api::Api(const Registry& registry, ApiOptions options) : registry_(registry), options_(options) {}

ApiResponse Api::models() const {
  const auto snap = registry_.current();
  return guarded(snap->dataset.get(), [&] {
    json list = json::array();
    for (ModelKind kind : kAllModelKinds) {
      const ArtifactEntry* e = snap->entry(kind);
      list.push_back({{"kind", std::string(to_string(kind))},
                      {"center", std::string(to_string(center_of(kind)))},
                      {"query_kind", std::string(data::to_string(query_kind(center_of(kind))))},
                      {"explanation", std::string(to_string(explanation_of(kind)))},
                      {"trained", snap->model(kind) != nullptr},
                      {"version", e ? json(e->version) : json(nullptr)}});
    }
    return respond(200, {{"fingerprint", snap->dataset->fingerprint}, {"models", list}});
  });
}

ApiResponse Api::entities(const QueryParams& q) const {
  const auto snap = registry_.current();
  return guarded(snap->dataset.get(), [&] {
    const std::string& kind_name = required_param(q, "kind");
    if (kind_name != "disease" && kind_name != "target")
      throw HttpError{400, "invalid_argument", "kind must be 'disease' or 'target', got '" + kind_name + "'"};
    const EntityKind kind = data::parse_entity_kind(kind_name, true);
    const std::string prefix = param(q, "prefix") ? *param(q, "prefix") : std::string();
    const long long page = int_param(q, "page", 1);
    const long long size = int_param(q, "page_size", static_cast<long long>(options_.default_page_size));
    if (page < 1) throw HttpError{400, "invalid_argument", "page must be at least 1"};
    if (size < 1 || size > static_cast<long long>(options_.max_page_size))
      throw HttpError{400, "invalid_argument",
                      "page_size must be between 1 and " + std::to_string(options_.max_page_size)};

    std::vector<EntityRef> matches;
    const auto kinds = snap->dataset->directory.kinds();
    if (std::find(kinds.begin(), kinds.end(), kind) != kinds.end()) {
      const data::Vocabulary& vocab = snap->dataset->directory.of(kind);
      const std::string needle = data::to_lower(prefix);
      for (std::size_t i = 0; i < vocab.size(); ++i) {
        const EntityRef e = vocab.ref(i);
        if (data::to_lower(e.id).rfind(needle, 0) == 0 || data::to_lower(e.name).rfind(needle, 0) == 0)
          matches.push_back(e);
      }
    }
    std::sort(matches.begin(), matches.end(), [](const EntityRef& a, const EntityRef& b) { return a.id < b.id; });

    json items = json::array();
    const auto first = static_cast<std::size_t>(page - 1) * static_cast<std::size_t>(size);
    for (std::size_t i = first; i < matches.size() && i < first + static_cast<std::size_t>(size); ++i) {
      json models = json::array();
      for (ModelKind k : kAllModelKinds)
        if (const TrainedModel* m = snap->model(k); m && query_kind(center_of(k)) == kind && m->covers(matches[i].id))
          models.push_back(std::string(to_string(k)));
      json item = entity_json(matches[i]);
      item["models"] = models;
      items.push_back(item);
    }
    return respond(200, {{"kind", kind_name},
                         {"prefix", prefix},
                         {"page", page},
                         {"page_size", size},
                         {"total", matches.size()},
                         {"entities", items}});
  });
}

ApiResponse Api::predict(std::string_view body) const {
  const auto snap = registry_.current();
  return guarded(snap->dataset.get(), [&] {
    json req;
    try {
      req = json::parse(body);
    } catch (const json::exception&) {
      throw HttpError{400, "invalid_argument", "request body is not valid JSON"};
    }
    if (!req.is_object()) throw HttpError{400, "invalid_argument", "request body must be a JSON object"};
    for (const char* key : {"center", "model", "entity"})
      if (!req.contains(key) || !req[key].is_string())
        throw HttpError{400, "invalid_argument", std::string("field '") + key + "' must be a string"};
    if (!req.contains("top_n") || !req["top_n"].is_number_integer())
      throw HttpError{400, "invalid_argument", "field 'top_n' must be an integer"};

    Center center;
    try {
      center = parse_center(req["center"].get<std::string>());
    } catch (const Error& e) {
      throw HttpError{400, "invalid_argument", e.what()};
    }
    const ModelKind kind = model_param(req["model"].get<std::string>());
    if (center_of(kind) != center)
      throw HttpError{400, "center_mismatch",
                      "model '" + std::string(to_string(kind)) + "' belongs to the " +
                          std::string(to_string(center_of(kind))) + " service, not " + std::string(to_string(center))};
    const long long top_n = req["top_n"].get<long long>();
    if (top_n < 1 || top_n > static_cast<long long>(options_.top_n_cap))
      throw HttpError{400, "invalid_argument",
                      "top_n must be between 1 and " + std::to_string(options_.top_n_cap)};
    const TrainedModel* model = snap->model(kind);
    if (!model)
      throw HttpError{409, "not_trained", "model '" + std::string(to_string(kind)) + "' has no trained artifact"};

    const EntityRef entity = resolve(*snap->dataset, req["entity"].get<std::string>(), query_kind(center));
    const predict::RankedList list = model->rank(entity, static_cast<std::size_t>(top_n));

    const std::string model_name(to_string(kind));
    json results = json::array();
    std::size_t rank = 0;
    for (const auto& e : list.entries)
      results.push_back({{"rank", ++rank},
                         {"drug", entity_json(e.entity)},
                         {"score", e.score},
                         {"detail", "/api/drugs/" + e.entity.id},
                         {"explain", "/api/explain?model=" + model_name + "&drug=" + e.entity.id +
                                         "&entity=" + entity.id}});
    return respond(200, {{"center", std::string(to_string(center))},
                         {"model", model_name},
                         {"version", snap->entry(kind)->version},
                         {"entity", entity_json(entity)},
                         {"top_n", top_n},
                         {"explanation", {{"available", true}, {"shape", std::string(to_string(explanation_of(kind)))}}},
                         {"results", results}});
  });
}

ApiResponse Api::drug(std::string_view id) const {
  const auto snap = registry_.current();
  return guarded(snap->dataset.get(), [&] {
    const data::Dataset& ds = *snap->dataset;
    const EntityRef drug = resolve(ds, id, EntityKind::drug);
    const data::DrugRecord* record = ds.find_drug_record(drug.id);
    if (!record) throw HttpError{404, "not_found", "drug '" + drug.id + "' has no detail record"};
    return respond(200, {{"drug", entity_json(drug)},
                         {"record",
                          {{"atc_codes", record->atc_codes},
                           {"background", record->background},
                           {"indication", record->indication},
                           {"structure", record->structure}}},
                         {"similar", similarity_json(kge::top_similar_drugs(ds.networks, drug.id, options_.similar_top, options_.similarity_layers))}});
  });
}

ApiResponse Api::explain(const QueryParams& q) const {
  const auto snap = registry_.current();
  return guarded(snap->dataset.get(), [&] {
    const data::Dataset& ds = *snap->dataset;
    const ModelKind kind = model_param(required_param(q, "model"));
    const long long hops = int_param(q, "max_hops", options_.default_max_hops);
    if (hops < 1 || hops > options_.max_hops_cap)
      throw HttpError{400, "invalid_argument", "max_hops must be between 1 and " + std::to_string(options_.max_hops_cap)};
    const EntityRef drug = resolve(ds, required_param(q, "drug"), EntityKind::drug);
    const EntityRef entity = resolve(ds, required_param(q, "entity"), query_kind(center_of(kind)));

    json out = {{"model", std::string(to_string(kind))},
                {"shape", std::string(to_string(explanation_of(kind)))},
                {"drug", entity_json(drug)},
                {"entity", entity_json(entity)}};
    if (explanation_of(kind) == ExplanationShape::similarity) {
      out["similar"] = similarity_json(kge::top_similar_drugs(ds.networks, drug.id, options_.similar_top, options_.similarity_layers));
      return respond(200, out);
    }
    if (!ds.kg) throw HttpError{404, "not_found", "no knowledge graph is loaded"};
    const kge::ExplanationSubgraph g =
        kge::extract_paths(*ds.kg, drug.id, entity.id, static_cast<int>(hops), options_.max_paths);
    json nodes = json::array(), edges = json::array(), paths = json::array();
    for (const auto& n : g.nodes) nodes.push_back(entity_json(n));
    for (const auto& e : g.edges) edges.push_back({{"source", e.head}, {"relation", e.relation}, {"target", e.tail}});
    for (const auto& p : g.paths) {
      json steps = json::array();
      for (const auto& s : p) steps.push_back({{"edge", s.edge}, {"forward", s.forward}});
      paths.push_back(steps);
    }
    out["max_hops"] = hops;
    out["nodes"] = nodes;
    out["edges"] = edges;
    out["paths"] = paths;
    return respond(200, out);
  });
}

}  // namespace repositioner::service
