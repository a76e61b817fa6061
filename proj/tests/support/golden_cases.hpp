#pragma once

#include "repositioner/service/api.hpp"

#include "json.hpp"

#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace repositioner::testing {

using service::ApiResponse;
using service::QueryParams;

// One request of the golden suite and the file holding its expected body.
struct Case {
  std::string name;
  std::string golden;  // file under the golden directory; id and name forms share one
  int status;
  std::string path;
  QueryParams params;
  std::string body;  // non-empty for POST
};

inline void PrintTo(const Case& c, std::ostream* os) { *os << c.name; }

inline std::string predict_body(const std::string& center, const std::string& model, const std::string& entity, int top_n) {
  return nlohmann::json{{"center", center}, {"model", model}, {"entity", entity}, {"top_n", top_n}}.dump();
}

inline std::vector<Case> golden_cases() {
  std::vector<Case> c = {
      {"models", "models.json", 200, "/api/models", {}, ""},
      {"entities_disease_first_page", "entities_disease_first_page.json", 200, "/api/entities", {{"kind", "disease"}}, ""},
      {"entities_disease_page_two", "entities_disease_page_two.json", 200, "/api/entities",
       {{"kind", "disease"}, {"page", "2"}, {"page_size", "10"}}, ""},
      {"entities_target_nr1h", "entities_target_nr1h.json", 200, "/api/entities",
       {{"kind", "target"}, {"prefix", "NR1H"}}, ""},
      {"entities_no_match", "entities_no_match.json", 200, "/api/entities", {{"kind", "disease"}, {"prefix", "zzz"}}, ""},
      {"entities_bad_kind", "error_entities_bad_kind.json", 400, "/api/entities", {{"kind", "drug"}}, ""},
      {"predict_deepdr_id", "predict_deepdr_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "deepdr", "C0342731", 20)},
      {"predict_deepdr_name", "predict_deepdr_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "deepdr", "Deficiency of mevalonate kinase", 20)},
      {"predict_hetdr_id", "predict_hetdr_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "hetdr", "C0342731", 20)},
      {"predict_diskge_id", "predict_diskge_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "diskge", "C0342731", 20)},
      {"predict_diskge_name", "predict_diskge_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "diskge", "deficiency of mevalonate kinase", 20)},
      {"predict_rotate_alias", "predict_diskge_c0342731.json", 200, "/api/predict", {},
       predict_body("disease-centric", "rotate", "C0342731", 20)},
      {"predict_deepdtnet_id", "predict_deepdtnet_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "deepdtnet", "9971", 20)},
      {"predict_aopedf_id", "predict_aopedf_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "aopedf", "9971", 20)},
      {"predict_tarkge_id", "predict_tarkge_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "tarkge", "9971", 20)},
      {"predict_tarkge_name", "predict_tarkge_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "tarkge", "NR1H4", 20)},
      {"predict_kgmtl_id", "predict_kgmtl_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "kgmtl", "9971", 20)},
      {"predict_kgmtl_name", "predict_kgmtl_9971.json", 200, "/api/predict", {},
       predict_body("target-centric", "kgmtl", "NR1H4", 20)},
      {"predict_center_mismatch", "error_predict_center_mismatch.json", 400, "/api/predict", {},
       predict_body("disease-centric", "kgmtl", "C0342731", 20)},
      {"predict_top_n_zero", "error_predict_top_n_zero.json", 400, "/api/predict", {},
       predict_body("disease-centric", "diskge", "C0342731", 0)},
      {"predict_top_n_over_cap", "error_predict_top_n_over_cap.json", 400, "/api/predict", {},
       predict_body("disease-centric", "diskge", "C0342731", 101)},
      {"predict_unknown_entity", "error_predict_unknown_entity.json", 404, "/api/predict", {},
       predict_body("disease-centric", "diskge", "zzz-unknown", 20)},
      {"predict_ambiguous_name", "error_predict_ambiguous_name.json", 422, "/api/predict", {},
       predict_body("disease-centric", "hetdr", "Periodic fever syndrome", 20)},
      {"predict_unknown_model", "error_predict_unknown_model.json", 400, "/api/predict", {},
       predict_body("disease-centric", "transe", "C0342731", 20)},
      {"predict_malformed_json", "error_predict_malformed_json.json", 400, "/api/predict", {}, "{\"center\": "},
      {"drug_db00001", "drug_db00001.json", 200, "/api/drugs/DB00001", {}, ""},
      {"drug_without_record", "error_drug_without_record.json", 404, "/api/drugs/DB00039", {}, ""},
      {"drug_missing_two_layers", "drug_db00040.json", 200, "/api/drugs/DB00040", {}, ""},
      {"drug_unknown", "error_drug_unknown.json", 404, "/api/drugs/DB99999", {}, ""},
      {"explain_diskge_connected", "explain_diskge_db00001_c0342731.json", 200, "/api/explain",
       {{"model", "diskge"}, {"drug", "DB00001"}, {"entity", "C0342731"}, {"max_hops", "3"}}, ""},
      {"explain_diskge_disconnected", "explain_diskge_db00001_c9000030.json", 200, "/api/explain",
       {{"model", "diskge"}, {"drug", "DB00001"}, {"entity", "C9000030"}}, ""},
      {"explain_tarkge_connected", "explain_tarkge_db00001_9971.json", 200, "/api/explain",
       {{"model", "tarkge"}, {"drug", "DB00001"}, {"entity", "NR1H4"}, {"max_hops", "2"}}, ""},
      {"explain_deepdr_similarity", "explain_deepdr_db00001_c0342731.json", 200, "/api/explain",
       {{"model", "deepdr"}, {"drug", "DB00001"}, {"entity", "C0342731"}}, ""},
      {"explain_unknown_model", "error_explain_unknown_model.json", 400, "/api/explain",
       {{"model", "transe"}, {"drug", "DB00001"}, {"entity", "C0342731"}}, ""},
      {"explain_hops_over_cap", "error_explain_hops_over_cap.json", 400, "/api/explain",
       {{"model", "diskge"}, {"drug", "DB00001"}, {"entity", "C0342731"}, {"max_hops", "5"}}, ""},
  };
  return c;
}

inline std::optional<ApiResponse> call_direct(const service::Api& api, const Case& c) {
  if (c.path == "/api/models") return api.models();
  if (c.path == "/api/entities") return api.entities(c.params);
  if (c.path == "/api/predict") return api.predict(c.body);
  if (c.path == "/api/explain") return api.explain(c.params);
  const std::string drugs = "/api/drugs/";
  if (c.path.rfind(drugs, 0) == 0) return api.drug(c.path.substr(drugs.size()));
  return std::nullopt;
}

}  // namespace repositioner::testing
