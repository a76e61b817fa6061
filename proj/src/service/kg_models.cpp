#include "model_support.hpp"

#include "repositioner/kge/rotate.hpp"
#include "repositioner/mtl/kg_mtl.hpp"

#include <algorithm>
#include <set>

namespace repositioner::service::detail {

using data::EntityKind;

namespace {

const data::KnowledgeGraph& graph_of(const data::Dataset& ds, ModelKind kind) {
  require(ds.kg.has_value(), ErrorCode::validation,
          "model '" + std::string(to_string(kind)) + "' needs a knowledge graph in the dataset");
  return *ds.kg;
}

std::string default_relation(ModelKind kind) { return kind == ModelKind::diskge ? "treats" : "targets"; }

kge::RotateConfig rotate_config(Section& s, std::uint64_t seed) {
  kge::RotateConfig c;
  c.dim = s.get_int("dim", c.dim);
  c.gamma = s.get_double("gamma", c.gamma);
  c.temperature = s.get_double("temperature", c.temperature);
  c.negatives = static_cast<int>(s.get_int("negatives", c.negatives));
  c.epochs = static_cast<int>(s.get_int("epochs", c.epochs));
  c.batch_size = static_cast<std::size_t>(s.get_int("batch_size", static_cast<long long>(c.batch_size)));
  c.learning_rate = s.get_double("lr", c.learning_rate);
  c.seed = seed;
  return c;
}

class KgeModel final : public TrainedModel {
 public:
  KgeModel(ModelKind kind, ModelBundle bundle, kge::RotateModel model, const data::KnowledgeGraph& kg,
           std::string relation)
      : kind_(kind), bundle_(std::move(bundle)), model_(std::move(model)), kg_(kg), relation_(std::move(relation)) {}

  ModelKind kind() const override { return kind_; }
  predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const override {
    require(kg_.find_entity(query.id).has_value(), ErrorCode::not_found,
            "'" + query.id + "' is not an entity of the knowledge graph");
    kge::CandidateQuery q;
    q.query = query.id;
    q.relation = relation_;
    q.candidate_kind = EntityKind::drug;
    q.top_n = top_n;
    q.filter_known = true;
    predict::RankedList out = kge::rank_candidates(model_, kg_, q);
    out.query = query;
    out.model = std::string(to_string(kind_));
    return out;
  }
  bool covers(std::string_view id) const override {
    const auto e = kg_.find_entity(id);
    return e && kg_.entity(*e).ref.kind == query_kind(center_of(kind_));
  }
  ModelBundle bundle() const override { return bundle_; }
  const kge::RotateModel& rotate() const { return model_; }

 private:
  ModelKind kind_;
  ModelBundle bundle_;
  kge::RotateModel model_;
  const data::KnowledgeGraph& kg_;
  std::string relation_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_kge(ModelKind kind, const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const data::KnowledgeGraph& kg = graph_of(ds, kind);
  const std::string relation = s.get("relation", default_relation(kind));
  require(kg.find_relation(relation).has_value(), ErrorCode::validation,
          "relation '" + relation + "' does not occur in the knowledge graph");
  const kge::RotateModel m = kge::train_rotate(kg, rotate_config(s, seed)).model;

  ModelBundle b = start_bundle(kind, ds, s);
  b.put("rotate.re", m.re);
  b.put("rotate.im", m.im);
  b.put("rotate.phase", m.phase);
  b.put("rotate.gamma", Matrix::Constant(1, 1, m.gamma));
  b.put("rotate.temperature", Matrix::Constant(1, 1, m.temperature));
  b.put("rotate.negatives", Matrix::Constant(1, 1, m.negatives));
  b.put("entities", m.entity_ids);
  b.put("relations", m.relations);
  return restore_kge(b, ds);
}

std::unique_ptr<TrainedModel> restore_kge(const ModelBundle& b, const data::Dataset& ds) {
  const ModelKind kind = parse_model_kind(b.kind);
  const data::KnowledgeGraph& kg = graph_of(ds, kind);
  kge::RotateModel m;
  m.entity_ids = b.list("entities");
  m.relations = b.list("relations");
  m.re = b.tensor("rotate.re");
  m.im = b.tensor("rotate.im");
  m.phase = b.tensor("rotate.phase");
  m.gamma = b.scalar("rotate.gamma");
  m.temperature = b.scalar("rotate.temperature");
  m.negatives = static_cast<int>(b.scalar("rotate.negatives"));
  return std::make_unique<KgeModel>(kind, b, std::move(m), kg,
                                    b.config_value(b.kind + ".relation", default_relation(kind)));
}

}  // namespace repositioner::service::detail

namespace repositioner::service {

const kge::RotateModel& rotate_parameters(const TrainedModel& model) {
  const auto* kge_model = dynamic_cast<const detail::KgeModel*>(&model);
  require(kge_model != nullptr, ErrorCode::not_found,
          "model '" + std::string(to_string(model.kind())) + "' holds no rotation embedding");
  return kge_model->rotate();
}

}  // namespace repositioner::service

namespace repositioner::service::detail {

// ---- KG-MTL ----

namespace {

mtl::Tasks parse_tasks(const std::string& name) {
  if (name == "both") return mtl::Tasks::both;
  if (name == "dti_only") return mtl::Tasks::dti_only;
  if (name == "cpi_only") return mtl::Tasks::cpi_only;
  fail(ErrorCode::invalid_argument, "kgmtl.tasks must be both, dti_only or cpi_only, got '" + name + "'");
}

std::string tasks_name(mtl::Tasks t) {
  return t == mtl::Tasks::both ? "both" : t == mtl::Tasks::dti_only ? "dti_only" : "cpi_only";
}

mtl::KgMtlConfig kgmtl_config(Section& s, std::uint64_t seed) {
  mtl::KgMtlConfig c;
  c.dim = s.get_int("dim", 32);
  c.rgcn_layers = static_cast<int>(s.get_int("rgcn_layers", c.rgcn_layers));
  c.gcn_layers = static_cast<int>(s.get_int("gcn_layers", c.gcn_layers));
  c.protein.residue_dim = s.get_int("residue_dim", c.protein.residue_dim);
  c.protein.channels = s.get_int("channels", c.protein.channels);
  std::vector<double> widths(c.protein.kernel_widths.begin(), c.protein.kernel_widths.end());
  widths = s.get_doubles("kernel_widths", widths);
  c.protein.kernel_widths.assign(widths.begin(), widths.end());
  c.head_hidden = s.get_int("head_hidden", 32);
  c.shared_unit = s.get_bool("shared_unit", c.shared_unit);
  c.shared_after_layer = static_cast<int>(s.get_int("shared_after_layer", c.shared_after_layer));
  c.tasks = parse_tasks(s.get("tasks", tasks_name(c.tasks)));
  c.hops = static_cast<int>(s.get_int("hops", c.hops));
  c.node_budget = static_cast<std::size_t>(s.get_int("node_budget", static_cast<long long>(c.node_budget)));
  c.epochs = static_cast<int>(s.get_int("epochs", 40));
  c.batch_size = static_cast<std::size_t>(s.get_int("batch_size", static_cast<long long>(c.batch_size)));
  c.learning_rate = s.get_double("lr", c.learning_rate);
  c.seed = seed;
  return c;
}

class KgMtlService final : public TrainedModel {
 public:
  KgMtlService(ModelBundle bundle, mtl::KgMtlModel model, const data::Dataset& ds)
      : bundle_(std::move(bundle)), model_(std::move(model)), ds_(ds) {}

  ModelKind kind() const override { return ModelKind::kgmtl; }
  predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const override {
    require(model_.has_entity(query.id), ErrorCode::not_found,
            "target '" + query.id + "' is outside the subgraph the KG-MTL model was trained on");
    std::set<std::string> linked;
    for (const auto& p : ds_.dti_pairs)
      if (p.second == query.id && p.label != 0) linked.insert(p.first);
    if (ds_.kg) {
      const auto t = ds_.kg->entity_index(query.id);
      for (std::size_t i : ds_.kg->incident(t)) {
        const auto& tr = ds_.kg->triples()[i];
        linked.insert(ds_.kg->entity(tr.head == t ? tr.tail : tr.head).ref.id);
      }
    }
    const std::vector<std::string> exclude(linked.begin(), linked.end());
    return {query, "kgmtl", mtl::rank_drugs_for_target(model_, query.id, top_n, &exclude)};
  }
  bool covers(std::string_view id) const override {
    return model_.has_entity(id) && model_.entities[model_.local_index(id)].kind == EntityKind::target;
  }
  ModelBundle bundle() const override { return bundle_; }

 private:
  ModelBundle bundle_;
  mtl::KgMtlModel model_;
  const data::Dataset& ds_;
};

void attach_sequences(mtl::KgMtlModel& m, const data::Dataset& ds) {
  for (const auto& mol : ds.molecules) m.molecules.emplace(mol.id, mol);
  for (const auto& p : ds.proteins) m.proteins.emplace(p.id, p);
}

}  // namespace

std::unique_ptr<TrainedModel> train_kgmtl(const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const data::KnowledgeGraph& kg = graph_of(ds, ModelKind::kgmtl);
  const mtl::KgMtlConfig config = kgmtl_config(s, seed);
  require(config.tasks != mtl::Tasks::cpi_only, ErrorCode::validation,
          "the served KG-MTL model ranks drugs for targets and needs the DTI task");
  const mtl::KgMtlModel m =
      mtl::train_kg_mtl(kg, ds.dti_pairs, ds.cpi_pairs, ds.molecules, ds.proteins, config).model;

  ModelBundle b = start_bundle(ModelKind::kgmtl, ds, s);
  b.put("seed", std::vector<std::string>{std::to_string(seed)});
  put_params(b, "kgmtl/", m.params);
  std::vector<std::string> ids;
  for (const auto& e : m.entities) ids.push_back(e.id);
  b.put("entities", std::move(ids));
  return restore_kgmtl(b, ds);
}

std::unique_ptr<TrainedModel> restore_kgmtl(const ModelBundle& b, const data::Dataset& ds) {
  const data::KnowledgeGraph& kg = graph_of(ds, ModelKind::kgmtl);
  const data::KeyValueFile echoed = config_from_bundle(b);
  Section s(echoed, "kgmtl");
  mtl::KgMtlModel m;
  m.config = kgmtl_config(s, std::stoull(b.list("seed").at(0)));
  m.params = get_params(b, "kgmtl/");
  std::vector<std::size_t> indices;
  for (const auto& id : b.list("entities")) {
    indices.push_back(kg.entity_index(id));
    m.entities.push_back(kg.entity(indices.back()).ref);
  }
  m.graph = mtl::induced_subgraph(kg, indices).graph;
  attach_sequences(m, ds);
  return std::make_unique<KgMtlService>(b, std::move(m), ds);
}

}  // namespace repositioner::service::detail
