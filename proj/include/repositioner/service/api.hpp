#pragma once

#include "repositioner/kge/explain.hpp"
#include "repositioner/service/registry.hpp"

#include <map>
#include <string>
#include <string_view>

namespace repositioner::service {

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON, newline terminated
};

using QueryParams = std::map<std::string, std::string>;

struct ApiOptions {
  std::size_t top_n_cap = 100;
  std::size_t similar_top = 20;
  std::vector<std::string> similarity_layers = kge::kSimilarityLayers;
  int default_max_hops = 3;
  int max_hops_cap = 4;
  int max_paths = 20;
  std::size_t default_page_size = 20;
  std::size_t max_page_size = 100;
};

// Handlers behind the five HTTP endpoints. Each call reads one registry
// snapshot and never modifies it; equal requests give byte-equal bodies.
// Errors come back as {"error": {"code", "message", "candidates"}}.
class Api {
 public:
  explicit Api(const Registry& registry, ApiOptions options = {});

  ApiResponse models() const;                          // GET /api/models
  ApiResponse entities(const QueryParams& q) const;    // GET /api/entities
  ApiResponse predict(std::string_view body) const;    // POST /api/predict
  ApiResponse drug(std::string_view id) const;         // GET /api/drugs/{id}
  ApiResponse explain(const QueryParams& q) const;     // GET /api/explain

  const ApiOptions& options() const { return options_; }

 private:
  const Registry& registry_;
  ApiOptions options_;
};

}  // namespace repositioner::service
