#include "repositioner/mtl/kg_mtl.hpp"

#include "repositioner/numerics/ffn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace repositioner::mtl {

namespace ad = num::ad;
using num::Activation;
using num::Var;

void KgMtlConfig::validate() const {
  require(dim >= 1 && head_hidden >= 1, ErrorCode::invalid_argument, "KG-MTL dimensions must be positive");
  require(rgcn_layers >= 1 && gcn_layers >= 1, ErrorCode::invalid_argument, "KG-MTL needs at least one layer");
  require(!shared_unit || (shared_after_layer >= 1 && shared_after_layer < rgcn_layers), ErrorCode::invalid_argument,
          "shared unit must sit between two RGCN layers");
  require(!shared_unit || tasks == Tasks::both, ErrorCode::invalid_argument,
          "the shared unit couples both tasks and needs both enabled");
  require(hops >= 0 && node_budget >= 1, ErrorCode::invalid_argument, "invalid subgraph limits");
  require(epochs >= 0 && batch_size >= 1 && learning_rate > 0.0, ErrorCode::invalid_argument,
          "invalid KG-MTL training schedule");
}

KgSubgraph extract_subgraph(const data::KnowledgeGraph& kg, const std::vector<std::size_t>& seeds, int hops,
                            std::size_t budget) {
  std::vector<std::size_t> order(seeds);
  std::sort(order.begin(), order.end());
  order.erase(std::unique(order.begin(), order.end()), order.end());
  require(order.size() <= budget, ErrorCode::invalid_argument,
          "node budget " + std::to_string(budget) + " is below the " + std::to_string(order.size()) + " seed entities");
  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> local(kg.entity_count(), kAbsent);
  for (std::size_t i = 0; i < order.size(); ++i) local[order[i]] = i;
  std::vector<std::size_t> frontier = order;
  for (int hop = 0; hop < hops && order.size() < budget; ++hop) {
    std::vector<std::size_t> next;
    for (std::size_t u : frontier)
      for (std::size_t ti : kg.incident(u)) {
        const auto& t = kg.triples()[ti];
        const std::size_t v = t.head == u ? t.tail : t.head;
        if (local[v] != kAbsent || order.size() >= budget) continue;
        local[v] = order.size();
        order.push_back(v);
        next.push_back(v);
      }
    frontier = std::move(next);
  }
  return induced_subgraph(kg, order);
}

KgSubgraph induced_subgraph(const data::KnowledgeGraph& kg, const std::vector<std::size_t>& order) {
  constexpr std::size_t kAbsent = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> local(kg.entity_count(), kAbsent);
  for (std::size_t i = 0; i < order.size(); ++i) {
    require(order[i] < kg.entity_count() && local[order[i]] == kAbsent, ErrorCode::invalid_argument,
            "subgraph entities must be distinct graph indices");
    local[order[i]] = i;
  }
  std::vector<bool> used_relation(kg.relation_count(), false);
  std::vector<std::size_t> kept;
  std::set<std::size_t> seen;
  for (std::size_t u : order)
    for (std::size_t ti : kg.incident(u)) {
      const auto& t = kg.triples()[ti];
      if (local[t.head] == kAbsent || local[t.tail] == kAbsent || !seen.insert(ti).second) continue;
      kept.push_back(ti);
      used_relation[t.relation] = true;
    }
  std::sort(kept.begin(), kept.end());
  std::vector<std::string> relations;
  std::vector<std::size_t> relation_slot(kg.relation_count(), kAbsent);
  for (std::size_t r = 0; r < kg.relation_count(); ++r)
    if (used_relation[r]) {
      relation_slot[r] = relations.size();
      relations.push_back(kg.relation(r));
    }
  std::vector<RelationalGraph::Edge> edges;
  for (std::size_t ti : kept) {
    const auto& t = kg.triples()[ti];
    edges.push_back({static_cast<Index>(local[t.head]), relation_slot[t.relation], static_cast<Index>(local[t.tail])});
  }
  KgSubgraph out;
  out.entities = order;
  out.graph = RelationalGraph::from_edges(static_cast<Index>(order.size()), std::move(relations), edges);
  return out;
}

namespace {

bool has_dti(const KgMtlConfig& c) { return c.tasks != Tasks::cpi_only; }
bool has_cpi(const KgMtlConfig& c) { return c.tasks != Tasks::dti_only; }

// Subgraph drugs that own a molecule: these rows pass through the shared unit.
struct Coupling {
  std::vector<Index> rows;
  std::vector<const data::MoleculeGraph*> molecules;
  Matrix scatter;  // n x rows, one-hot columns
};

Coupling coupling(const KgMtlModel& m) {
  Coupling c;
  if (!m.config.shared_unit) return c;
  for (std::size_t i = 0; i < m.entities.size(); ++i) {
    auto it = m.molecules.find(m.entities[i].id);
    if (m.entities[i].kind != data::EntityKind::drug || it == m.molecules.end()) continue;
    c.rows.push_back(static_cast<Index>(i));
    c.molecules.push_back(&it->second);
  }
  c.scatter = Matrix::Zero(m.graph.nodes, static_cast<Index>(c.rows.size()));
  for (std::size_t k = 0; k < c.rows.size(); ++k) c.scatter(c.rows[k], static_cast<Index>(k)) = 1.0;
  return c;
}

Var readouts(const KgMtlModel& m, const num::BoundParams& bound, num::Tape& tape,
             const std::vector<const data::MoleculeGraph*>& mols) {
  std::vector<Var> rows;
  for (const auto* mol : mols) rows.push_back(mol_gcn_readout(bound, tape, *mol, m.config.gcn_layers));
  return ad::concat_rows(rows);
}

// RGCN trunk; `stop` layers deep (all layers when stop < 0).
Var trunk(const KgMtlModel& m, const Coupling& c, const num::BoundParams& bound, num::Tape& tape, int stop = -1) {
  const int layers = stop < 0 ? m.config.rgcn_layers : stop;
  Var h = bound["ent"];
  for (int l = 0; l < layers; ++l) {
    h = rgcn_layer(bound, m.graph, h, l);
    if (m.config.shared_unit && l + 1 == m.config.shared_after_layer && !c.rows.empty() && stop < 0) {
      const Var xd = ad::gather_rows(h, c.rows);
      const SharedUnitOutput su = shared_unit_apply(bound, xd, readouts(m, bound, tape, c.molecules));
      h = ad::add(h, ad::matmul(tape.constant(c.scatter), ad::sub(su.drug, xd)));
    }
  }
  return h;
}

Var dti_logits(const num::BoundParams& bound, const Var& h, const std::vector<Index>& drugs,
               const std::vector<Index>& targets) {
  const Var pair = ad::concat_cols({ad::gather_rows(h, drugs), ad::gather_rows(h, targets)});
  return num::ffn_apply(bound, "dti.mlp", {Activation::relu, Activation::identity}, pair);
}

Var cpi_logits(const KgMtlModel& m, const Coupling& c, const num::BoundParams& bound, num::Tape& tape,
               const std::vector<const data::MoleculeGraph*>& compounds,
               const std::vector<const data::ProteinSequence*>& proteins) {
  Var xg = readouts(m, bound, tape, compounds);
  if (m.config.shared_unit) {
    const Var h = trunk(m, c, bound, tape, m.config.shared_after_layer);
    std::vector<Index> rows;
    for (const auto* mol : compounds) rows.push_back(static_cast<Index>(m.local_index(mol->id)));
    xg = shared_unit_apply(bound, ad::gather_rows(h, rows), xg).molecule;
  }
  const Var hidden = num::ffn_apply(bound, "cpi.dnn", {Activation::relu}, xg);
  std::vector<Var> encoded;
  for (const auto* p : proteins) encoded.push_back(protein_encode(bound, m.config.protein, p->sequence));
  return num::ffn_apply(bound, "cpi.mlp", {Activation::relu, Activation::identity},
                        ad::concat_cols({hidden, ad::concat_rows(encoded)}));
}

double clamp_probability(double logit) {
  const double p = 1.0 / (1.0 + std::exp(-logit));
  return std::clamp(p, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

struct TaskData {
  std::vector<Index> first;  // DTI: drug rows; CPI: unused
  std::vector<Index> second;
  std::vector<const data::MoleculeGraph*> compounds;
  std::vector<const data::ProteinSequence*> proteins;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  TaskData subset(const std::vector<std::size_t>& idx, std::size_t start, std::size_t end) const {
    TaskData out;
    for (std::size_t k = start; k < end; ++k) {
      const std::size_t i = idx[k];
      if (!first.empty()) {
        out.first.push_back(first[i]);
        out.second.push_back(second[i]);
      }
      if (!compounds.empty()) {
        out.compounds.push_back(compounds[i]);
        out.proteins.push_back(proteins[i]);
      }
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

Var task_loss(const KgMtlModel& m, const Coupling& c, const num::BoundParams& bound, num::Tape& tape, bool dti,
              const TaskData& d) {
  const Var logits =
      dti ? dti_logits(bound, trunk(m, c, bound, tape), d.first, d.second) : cpi_logits(m, c, bound, tape, d.compounds, d.proteins);
  const Matrix labels = Eigen::Map<const Vector>(d.labels.data(), static_cast<Index>(d.labels.size()));
  return ad::scale(ad::bce_with_logits(logits, labels), 1.0 / static_cast<double>(d.size()));
}

double full_loss(const KgMtlModel& m, const Coupling& c, bool dti, const TaskData& d) {
  num::Tape tape;
  const auto bound = num::bind(tape, m.params);
  const double v = task_loss(m, c, bound, tape, dti, d).scalar();
  require(std::isfinite(v), ErrorCode::non_finite, std::string(dti ? "DTI" : "CPI") + " loss is not finite");
  return v;
}

bool owned_by_dti(const std::string& name) {
  return name == "ent" || name.rfind("rgcn.", 0) == 0 || name.rfind("dti.", 0) == 0;
}

}  // namespace

std::size_t KgMtlModel::local_index(std::string_view id) const {
  for (std::size_t i = 0; i < entities.size(); ++i)
    if (entities[i].id == id) return i;
  fail(ErrorCode::not_found, "entity '" + std::string(id) + "' is not in the KG-MTL subgraph");
}

bool KgMtlModel::has_entity(std::string_view id) const {
  for (const auto& e : entities)
    if (e.id == id) return true;
  return false;
}

Matrix KgMtlModel::entity_embeddings() const {
  require(has_dti(config), ErrorCode::unsupported, "model was trained without the DTI task");
  const Coupling c = coupling(*this);
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  return trunk(*this, c, bound, tape).value();
}

Vector KgMtlModel::dti_scores(const std::vector<std::string>& drugs, std::string_view target) const {
  require(has_dti(config), ErrorCode::unsupported, "model was trained without the DTI task");
  const Coupling c = coupling(*this);
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  std::vector<Index> d, t;
  const auto target_row = static_cast<Index>(local_index(target));
  for (const auto& id : drugs) {
    d.push_back(static_cast<Index>(local_index(id)));
    t.push_back(target_row);
  }
  if (drugs.empty()) return Vector();
  const Matrix logits = dti_logits(bound, trunk(*this, c, bound, tape), d, t).value();
  Vector out(logits.rows());
  for (Index i = 0; i < logits.rows(); ++i) out(i) = clamp_probability(logits(i, 0));
  return out;
}

double KgMtlModel::predict_dti(std::string_view drug, std::string_view target) const {
  return dti_scores({std::string(drug)}, target)(0);
}

double KgMtlModel::predict_cpi(std::string_view compound, std::string_view protein) const {
  require(has_cpi(config), ErrorCode::unsupported, "model was trained without the CPI task");
  auto mol = molecules.find(std::string(compound));
  require(mol != molecules.end(), ErrorCode::not_found, "unknown compound '" + std::string(compound) + "'");
  auto prot = proteins.find(std::string(protein));
  require(prot != proteins.end(), ErrorCode::not_found, "unknown protein '" + std::string(protein) + "'");
  const Coupling c = coupling(*this);
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  return clamp_probability(cpi_logits(*this, c, bound, tape, {&mol->second}, {&prot->second}).value()(0, 0));
}

KgMtlResult train_kg_mtl(const data::KnowledgeGraph& kg, const std::vector<data::LabeledPair>& dti,
                         const std::vector<data::LabeledPair>& cpi, const std::vector<data::MoleculeGraph>& molecules,
                         const std::vector<data::ProteinSequence>& proteins, const KgMtlConfig& config) {
  config.validate();
  const bool use_dti = has_dti(config), use_cpi = has_cpi(config);
  require(!use_dti || !dti.empty(), ErrorCode::validation, "KG-MTL needs DTI pairs");
  require(!use_cpi || !cpi.empty(), ErrorCode::validation, "KG-MTL needs CPI pairs");

  KgMtlResult result;
  KgMtlModel& m = result.model;
  m.config = config;
  for (const auto& mol : molecules) m.molecules.emplace(mol.id, mol);
  for (const auto& p : proteins) m.proteins.emplace(p.id, p);

  if (use_dti) {
    std::vector<std::size_t> seeds;
    for (const auto& p : dti) {
      const auto d = kg.find_entity(p.first), t = kg.find_entity(p.second);
      require(d && t, ErrorCode::not_found, "DTI pair (" + p.first + ", " + p.second + ") does not resolve in the KG");
      seeds.push_back(*d);
      seeds.push_back(*t);
    }
    if (config.shared_unit)
      for (const auto& p : cpi) {
        const auto d = kg.find_entity(p.first);
        require(d.has_value(), ErrorCode::not_found,
                "compound '" + p.first + "' has no KG entity for the shared unit");
        seeds.push_back(*d);
      }
    const KgSubgraph sub = extract_subgraph(kg, seeds, config.hops, config.node_budget);
    for (std::size_t e : sub.entities) m.entities.push_back(kg.entity(e).ref);
    m.graph = sub.graph;
  }

  TaskData dti_data, cpi_data;
  for (const auto& p : dti) {
    if (!use_dti) break;
    dti_data.first.push_back(static_cast<Index>(m.local_index(p.first)));
    dti_data.second.push_back(static_cast<Index>(m.local_index(p.second)));
    dti_data.labels.push_back(p.label != 0 ? 1.0 : 0.0);
  }
  for (const auto& p : cpi) {
    if (!use_cpi) break;
    auto mol = m.molecules.find(p.first);
    auto prot = m.proteins.find(p.second);
    require(mol != m.molecules.end(), ErrorCode::not_found, "CPI compound '" + p.first + "' has no molecule graph");
    require(prot != m.proteins.end(), ErrorCode::not_found, "CPI protein '" + p.second + "' has no sequence");
    cpi_data.compounds.push_back(&mol->second);
    cpi_data.proteins.push_back(&prot->second);
    cpi_data.labels.push_back(p.label != 0 ? 1.0 : 0.0);
  }

  const std::uint64_t seed = config.seed;
  if (use_dti) {
    Rng ent = make_rng(seed, "kgmtl.entities");
    m.params.add("ent", random_normal(m.graph.nodes, config.dim, 1.0 / std::sqrt(static_cast<double>(config.dim)), ent));
    Rng rgcn = make_rng(seed, "kgmtl.rgcn");
    add_rgcn_params(m.params, m.graph, config.rgcn_layers, config.dim, rgcn);
    Rng head = make_rng(seed, "kgmtl.dti_head");
    num::add_to_params(num::make_ffn({2 * config.dim, config.head_hidden, 1}, Activation::relu, Activation::identity, head),
                       "dti.mlp", m.params);
  }
  if (use_cpi) {
    Rng gcn = make_rng(seed, "kgmtl.gcn");
    add_gcn_params(m.params, config.gcn_layers, config.dim, gcn);
    Rng prot = make_rng(seed, "kgmtl.protein");
    add_protein_params(m.params, config.protein, prot);
    Rng head = make_rng(seed, "kgmtl.cpi_head");
    num::add_to_params(num::make_ffn({config.dim, config.dim}, Activation::relu, Activation::relu, head), "cpi.dnn",
                       m.params);
    num::add_to_params(num::make_ffn({config.dim + config.protein.output_dim(), config.head_hidden, 1},
                                     Activation::relu, Activation::identity, head),
                       "cpi.mlp", m.params);
  }
  if (config.shared_unit) {
    Rng su = make_rng(seed, "kgmtl.shared");
    add_shared_unit_params(m.params, config.dim, su);
  }

  const Coupling c = coupling(m);
  double dti_loss = use_dti ? full_loss(m, c, true, dti_data) : 0.0;
  double cpi_loss = use_cpi ? full_loss(m, c, false, cpi_data) : 0.0;
  if (use_dti) result.dti_history.push_back(dti_loss);
  if (use_cpi) result.cpi_history.push_back(cpi_loss);

  num::AdamState state = num::make_adam_state(m.params.values());
  num::AdamConfig dti_adam, cpi_adam;
  dti_adam.lr = cpi_adam.lr = config.learning_rate;
  Rng dti_batches = make_rng(seed, "kgmtl.dti.batches");
  Rng cpi_batches = make_rng(seed, "kgmtl.cpi.batches");
  std::vector<std::size_t> dti_order(dti_data.size()), cpi_order(cpi_data.size());
  for (std::size_t i = 0; i < dti_order.size(); ++i) dti_order[i] = i;
  for (std::size_t i = 0; i < cpi_order.size(); ++i) cpi_order[i] = i;
  std::vector<bool> dti_owned(m.params.size());
  for (std::size_t i = 0; i < m.params.size(); ++i) dti_owned[i] = owned_by_dti(m.params.names()[i]);

  auto step = [&](bool dti_task, const TaskData& batch, const num::AdamConfig& adam) {
    num::Tape tape;
    const auto bound = num::bind(tape, m.params);
    const Var loss = task_loss(m, c, bound, tape, dti_task, batch);
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "KG-MTL loss is not finite");
    tape.backward(loss);
    std::vector<bool> touched;
    const auto grads = bound.grads(tape, &touched);
    num::adam_step(m.params.values(), grads, state, adam, &touched);
  };

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<Matrix> saved = m.params.values();
    const num::AdamState saved_state = state;
    if (use_dti) std::shuffle(dti_order.begin(), dti_order.end(), dti_batches);
    if (use_cpi) std::shuffle(cpi_order.begin(), cpi_order.end(), cpi_batches);
    const std::size_t nd = use_dti ? (dti_data.size() + config.batch_size - 1) / config.batch_size : 0;
    const std::size_t nc = use_cpi ? (cpi_data.size() + config.batch_size - 1) / config.batch_size : 0;
    for (std::size_t k = 0; k < std::max(nd, nc); ++k) {
      if (k < nd)
        step(true, dti_data.subset(dti_order, k * config.batch_size, std::min(dti_data.size(), (k + 1) * config.batch_size)),
             dti_adam);
      if (k < nc)
        step(false, cpi_data.subset(cpi_order, k * config.batch_size, std::min(cpi_data.size(), (k + 1) * config.batch_size)),
             cpi_adam);
    }
    const double next_dti = use_dti ? full_loss(m, c, true, dti_data) : 0.0;
    const double next_cpi = use_cpi ? full_loss(m, c, false, cpi_data) : 0.0;
    const bool dti_ok = next_dti <= dti_loss, cpi_ok = next_cpi <= cpi_loss;

    auto keep = [&](bool dti_task) {
      if (dti_task) {
        dti_loss = next_dti;
        result.dti_history.push_back(dti_loss);
        dti_adam.lr = std::min(config.learning_rate, dti_adam.lr * 1.25);
      } else {
        cpi_loss = next_cpi;
        result.cpi_history.push_back(cpi_loss);
        cpi_adam.lr = std::min(config.learning_rate, cpi_adam.lr * 1.25);
      }
    };
    auto revert = [&](bool dti_task) {
      for (std::size_t i = 0; i < m.params.size(); ++i) {
        if (dti_owned[i] != dti_task) continue;
        m.params.values()[i] = saved[i];
        state.m[i] = saved_state.m[i];
        state.v[i] = saved_state.v[i];
        state.steps[i] = saved_state.steps[i];
      }
      (dti_task ? dti_adam : cpi_adam).lr *= 0.5;
    };

    if (config.shared_unit) {
      if (dti_ok && cpi_ok) {
        keep(true);
        keep(false);
      } else {
        m.params.values() = saved;
        state = saved_state;
        dti_adam.lr *= 0.5;
        cpi_adam.lr *= 0.5;
        ++result.rejected_epochs;
      }
    } else {
      if (use_dti) dti_ok ? keep(true) : revert(true);
      if (use_cpi) cpi_ok ? keep(false) : revert(false);
      if ((use_dti && !dti_ok) || (use_cpi && !cpi_ok)) ++result.rejected_epochs;
    }
    const double floor = config.learning_rate * 1e-9;
    if ((!use_dti || dti_adam.lr < floor) && (!use_cpi || cpi_adam.lr < floor)) break;
  }
  return result;
}

std::vector<predict::RankedEntry> rank_drugs_for_target(const KgMtlModel& model, std::string_view target,
                                                        std::size_t top_n, const std::vector<std::string>* exclude) {
  std::vector<std::string> ids;
  std::vector<data::EntityRef> refs;
  std::vector<bool> skip;
  for (const auto& e : model.entities)
    if (e.kind == data::EntityKind::drug) {
      ids.push_back(e.id);
      refs.push_back(e);
      skip.push_back(exclude && std::find(exclude->begin(), exclude->end(), e.id) != exclude->end());
    }
  if (ids.empty()) return {};
  return predict::rank_entities(refs, model.dti_scores(ids, target), top_n, &skip);
}

}  // namespace repositioner::mtl
