#include "acceptance/criteria.hpp"

#include "repositioner/cli/cli.hpp"
#include "repositioner/service/server.hpp"

#include "support/fixture_registry.hpp"
#include "support/golden_cases.hpp"

#include "httplib.h"
#include "json.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace repositioner::acceptance {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::map<std::string, std::string> tree_contents(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      out[fs::relative(e.path(), root).string()] = read_file(e.path());
  return out;
}

}  // namespace

Outcome determinism() {
  const fs::path dir = testing::scratch_dir("acceptance-determinism");
  const auto files = fixtures::write_service_fixture(dir / "data");
  std::vector<std::string> outputs;
  for (const char* run : {"first", "second"}) {
    std::ostringstream out, err;
    const int code = cli::run({"train", "--config", files.config.string(), "--model", "all", "--seed", "7",
                               "--artifacts", (dir / run).string()},
                              out, err);
    if (code != cli::kOk) return {false, "train exited with " + std::to_string(code) + ": " + err.str()};
    outputs.push_back(out.str());
  }
  const auto a = tree_contents(dir / "first"), b = tree_contents(dir / "second");
  std::size_t kinds = 0;
  std::istringstream lines(outputs[0]);
  for (std::string line; std::getline(lines, line);) ++kinds;
  fs::remove_all(dir);
  const bool ok = kinds == service::kAllModelKinds.size() && outputs[0] == outputs[1] && a == b && !a.empty();
  return {ok, format("%zu model kinds trained twice with seed 7; reported checksums %s, %zu artifact files %s", kinds,
                     outputs[0] == outputs[1] ? "equal" : "differ", a.size(),
                     a == b ? "byte-identical" : "differ")};
}

namespace {

struct Served {
  service::Registry registry;
  service::Api api;
  service::HttpServer server;
  int port = 0;
  std::thread thread;

  Served()
      : registry(testing::trained_fixture().snapshot),
        api(registry),
        server(api, service::ServerOptions{"127.0.0.1", 0, {}, nullptr}) {
    port = server.bind();
    thread = std::thread([this] { server.run(); });
    server.wait_until_ready();
  }
  ~Served() {
    server.stop();
    thread.join();
  }

  std::optional<service::ApiResponse> over_http(const testing::Case& c) const {
    httplib::Client client("127.0.0.1", port);
    httplib::Result res;
    if (!c.body.empty()) {
      res = client.Post(c.path, c.body, "application/json");
    } else {
      httplib::Params params(c.params.begin(), c.params.end());
      res = client.Get(c.path, params, httplib::Headers{});
    }
    if (!res) return std::nullopt;
    return service::ApiResponse{res->status, res->body};
  }
};

bool kg_linked(const data::KnowledgeGraph& kg, const std::string& a, const std::string& b) {
  for (std::size_t t = 0; t < kg.triple_count(); ++t) {
    const data::Triple tr = kg.triple(t);
    if ((tr.head == a && tr.tail == b) || (tr.head == b && tr.tail == a)) return true;
  }
  return false;
}

// Drugs a model must never return for `query`, derived from the raw dataset.
std::set<std::string> excluded_drugs(const data::Dataset& ds, service::ModelKind kind, const std::string& query) {
  std::set<std::string> out;
  const auto& drugs = ds.networks.vocab(data::EntityKind::drug);
  const data::EntityKind qk = service::query_kind(service::center_of(kind));
  switch (kind) {
    case service::ModelKind::deepdr:
    case service::ModelKind::hetdr:
    case service::ModelKind::deepdtnet:
    case service::ModelKind::aopedf: {
      const data::NetworkLayer* layer = ds.networks.find_layer(data::EntityKind::drug, qk);
      const auto col = static_cast<Index>(ds.networks.vocab(qk).index_of(query));
      for (std::size_t d = 0; d < drugs.size(); ++d)
        if (layer->adjacency.coeff(static_cast<Index>(d), col) != 0.0) out.insert(drugs.id(d));
      break;
    }
    case service::ModelKind::diskge:
    case service::ModelKind::tarkge:
      for (std::size_t e = 0; e < ds.kg->entity_count(); ++e) {
        const auto& ref = ds.kg->entity(e).ref;
        if (ref.kind == data::EntityKind::drug && kg_linked(*ds.kg, ref.id, query)) out.insert(ref.id);
      }
      break;
    case service::ModelKind::kgmtl:
      for (const auto& p : ds.dti_pairs)
        if (p.second == query && p.label == 1) out.insert(p.first);
      for (std::size_t d = 0; d < drugs.size(); ++d)
        if (kg_linked(*ds.kg, drugs.id(d), query)) out.insert(drugs.id(d));
      break;
  }
  return out;
}

// Ranks 1..n, scores non-increasing, ties by ascending id, no excluded drug.
std::string ranking_problem(const json& results, const std::set<std::string>& excluded) {
  for (std::size_t i = 0; i < results.size(); ++i) {
    const json& row = results[i];
    const std::string id = row["drug"]["id"];
    if (row["rank"].get<std::size_t>() != i + 1) return "rank field out of sequence at " + id;
    if (excluded.count(id)) return "returned already linked drug " + id;
    if (i > 0) {
      const double prev = results[i - 1]["score"], cur = row["score"];
      if (prev < cur) return "score increases at rank " + std::to_string(i + 1);
      if (prev == cur && !(results[i - 1]["drug"]["id"].get<std::string>() < id)) return "tie not ordered by id";
    }
  }
  return {};
}

}  // namespace

Outcome service_contract() {
  const auto& fx = testing::trained_fixture();
  Served served;
  const std::string before = service::state_hash(*served.registry.current());
  const fs::path goldens = REPOSITIONER_GOLDEN_DIR;

  std::size_t cases = 0;
  std::vector<std::string> problems;
  for (const auto& c : testing::golden_cases()) {
    ++cases;
    const auto direct = testing::call_direct(served.api, c);
    const auto http = served.over_http(c);
    const fs::path golden = goldens / c.golden;
    if (!direct || !http) {
      problems.push_back(c.name + ": no response");
    } else if (direct->status != c.status || http->status != c.status) {
      problems.push_back(c.name + ": status " + std::to_string(direct->status));
    } else if (!fs::exists(golden) || direct->body != read_file(golden)) {
      problems.push_back(c.name + ": body differs from " + c.golden);
    } else if (http->body != direct->body) {
      problems.push_back(c.name + ": HTTP body differs from direct call");
    }
  }

  // The two example queries, by id and by name, on every model that serves them.
  std::size_t example_queries = 0;
  const std::vector<std::pair<std::string, std::string>> examples = {
      {"C0342731", "Deficiency of mevalonate kinase"}, {"9971", "NR1H4"}};
  for (service::ModelKind kind : service::kAllModelKinds) {
    const std::string center(service::to_string(service::center_of(kind)));
    const auto& [id, name] = examples[service::center_of(kind) == service::Center::disease_centric ? 0 : 1];
    const auto excluded = excluded_drugs(*fx.dataset, kind, id);
    std::string first_body;
    for (const std::string& entity : {id, name}) {
      ++example_queries;
      const auto r = served.api.predict(testing::predict_body(center, std::string(service::to_string(kind)), entity, 20));
      const std::string label = std::string(service::to_string(kind)) + " " + entity;
      if (r.status != 200) {
        problems.push_back(label + ": status " + std::to_string(r.status));
        continue;
      }
      const json body = json::parse(r.body);
      if (body["results"].size() != 20) problems.push_back(label + ": " + std::to_string(body["results"].size()) + " results");
      if (body["entity"]["id"] != id) problems.push_back(label + ": resolved to " + body["entity"]["id"].dump());
      if (auto p = ranking_problem(body["results"], excluded); !p.empty()) problems.push_back(label + ": " + p);
      if (first_body.empty()) {
        first_body = r.body;
      } else if (r.body != first_body) {
        problems.push_back(label + ": name form differs from id form");
      }
    }
  }

  if (service::state_hash(*served.registry.current()) != before) problems.push_back("registry state changed");
  std::string detail = format("%zu golden cases compared byte for byte over direct calls and HTTP; %zu example queries "
                              "(C0342731 and 9971/NR1H4, top 20) checked for order and exclusion; %zu problems",
                              cases, example_queries, problems.size());
  for (std::size_t i = 0; i < problems.size() && i < 5; ++i) detail += "; " + problems[i];
  return {problems.empty(), detail};
}

}  // namespace repositioner::acceptance
