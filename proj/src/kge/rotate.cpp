#include "repositioner/kge/rotate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace repositioner::kge {

namespace ad = num::ad;
using data::IndexedTriple;
using num::Var;

void RotateConfig::validate() const {
  require(dim >= 2, ErrorCode::invalid_argument, "RotatE dimension must be at least 2");
  require(negatives >= 1, ErrorCode::invalid_argument, "RotatE needs at least one negative per triple");
  require(batch_size >= 1, ErrorCode::invalid_argument, "RotatE batch size must be positive");
  require(epochs >= 0, ErrorCode::invalid_argument, "RotatE epochs must be non-negative");
  require(gamma > 0.0 && std::isfinite(gamma), ErrorCode::invalid_argument, "RotatE margin must be positive");
  require(temperature >= 0.0 && std::isfinite(temperature), ErrorCode::invalid_argument,
          "RotatE temperature must be non-negative");
  require(learning_rate > 0.0, ErrorCode::invalid_argument, "RotatE learning rate must be positive");
}

std::size_t RotateModel::entity_index(std::string_view id) const {
  for (std::size_t i = 0; i < entity_ids.size(); ++i)
    if (entity_ids[i] == id) return i;
  fail(ErrorCode::not_found, "unknown entity '" + std::string(id) + "'");
}

std::size_t RotateModel::relation_index(std::string_view name) const {
  for (std::size_t i = 0; i < relations.size(); ++i)
    if (relations[i] == name) return i;
  fail(ErrorCode::not_found, "unknown relation '" + std::string(name) + "'");
}

double RotateModel::distance(std::size_t head, std::size_t relation, std::size_t tail) const {
  require(head < entity_ids.size() && tail < entity_ids.size(), ErrorCode::not_found, "entity index out of range");
  require(relation < relations.size(), ErrorCode::not_found, "relation index out of range");
  const auto h = static_cast<Index>(head), r = static_cast<Index>(relation), t = static_cast<Index>(tail);
  double d = 0.0;
  for (Index c = 0; c < dim(); ++c) {
    const double cs = std::cos(phase(r, c)), sn = std::sin(phase(r, c));
    const double x = re(h, c) * cs - im(h, c) * sn - re(t, c);
    const double y = re(h, c) * sn + im(h, c) * cs - im(t, c);
    d += std::sqrt(x * x + y * y);
  }
  return d;
}

Vector RotateModel::distances_as_head(std::size_t relation, std::size_t tail) const {
  Vector out(static_cast<Index>(entity_ids.size()));
  for (std::size_t h = 0; h < entity_ids.size(); ++h) out(static_cast<Index>(h)) = distance(h, relation, tail);
  return out;
}

Vector RotateModel::distances_as_tail(std::size_t head, std::size_t relation) const {
  Vector out(static_cast<Index>(entity_ids.size()));
  for (std::size_t t = 0; t < entity_ids.size(); ++t) out(static_cast<Index>(t)) = distance(head, relation, t);
  return out;
}

double rotate_distance(const RotateModel& model, std::string_view head, std::string_view relation,
                       std::string_view tail) {
  return model.distance(model.entity_index(head), model.relation_index(relation), model.entity_index(tail));
}

std::vector<std::vector<IndexedTriple>> sample_negatives(const data::KnowledgeGraph& kg,
                                                         const std::vector<IndexedTriple>& triples,
                                                         int per_triple, Rng& rng) {
  require(per_triple >= 1, ErrorCode::invalid_argument, "RotatE needs at least one negative per triple");
  std::uniform_int_distribution<std::size_t> pick(0, kg.entity_count() - 1);
  std::bernoulli_distribution corrupt_head(0.5);
  std::vector<std::vector<IndexedTriple>> out(triples.size());
  for (std::size_t i = 0; i < triples.size(); ++i) {
    for (int j = 0; j < per_triple; ++j) {
      IndexedTriple neg = triples[i];
      const bool head = corrupt_head(rng);
      for (int attempt = 0; attempt < 20; ++attempt) {
        (head ? neg.head : neg.tail) = pick(rng);
        if (!kg.contains(neg)) break;
      }
      out[i].push_back(neg);
    }
  }
  return out;
}

namespace {

constexpr double kModulusFloor = 1e-30;

Var batch_distances(const num::BoundParams& bound, const std::vector<Index>& h, const std::vector<Index>& r,
                    const std::vector<Index>& t) {
  const Var hre = ad::gather_rows(bound["re"], h), him = ad::gather_rows(bound["im"], h);
  const Var theta = ad::gather_rows(bound["phase"], r);
  const Var c = ad::cos(theta), s = ad::sin(theta);
  const Var x = ad::sub(ad::sub(ad::hadamard(hre, c), ad::hadamard(him, s)), ad::gather_rows(bound["re"], t));
  const Var y = ad::sub(ad::add(ad::hadamard(hre, s), ad::hadamard(him, c)), ad::gather_rows(bound["im"], t));
  return ad::sum_cols(ad::sqrt(ad::add_scalar(ad::add(ad::square(x), ad::square(y)), kModulusFloor)));
}

// Softmax of -temperature * d over each consecutive group of `group` entries.
Vector adversarial_weights(const Vector& d, std::size_t group, double temperature) {
  Vector w(d.size());
  for (Index start = 0; start < d.size(); start += static_cast<Index>(group)) {
    const auto n = static_cast<Index>(group);
    const Vector logits = -temperature * d.segment(start, n);
    const Vector e = (logits.array() - logits.maxCoeff()).exp();
    w.segment(start, n) = e / e.sum();
  }
  return w;
}

double log_sigmoid(double x) { return x >= 0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x)); }

}  // namespace

Var rotate_batch_loss(num::Tape& tape, const num::BoundParams& bound, const RotateModel& shape,
                      const std::vector<IndexedTriple>& batch,
                      const std::vector<std::vector<IndexedTriple>>& negatives) {
  require(!batch.empty() && batch.size() == negatives.size(), ErrorCode::invalid_argument,
          "RotatE batch needs one negative group per triple");
  const std::size_t group = negatives.front().size();
  std::vector<Index> ph, pr, pt, nh, nr, nt;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    ph.push_back(static_cast<Index>(batch[i].head));
    pr.push_back(static_cast<Index>(batch[i].relation));
    pt.push_back(static_cast<Index>(batch[i].tail));
    require(negatives[i].size() == group && group >= 1, ErrorCode::invalid_argument,
            "every triple needs the same number of negatives");
    for (const auto& n : negatives[i]) {
      nh.push_back(static_cast<Index>(n.head));
      nr.push_back(static_cast<Index>(n.relation));
      nt.push_back(static_cast<Index>(n.tail));
    }
  }
  const double b = static_cast<double>(batch.size());
  const Var dp = batch_distances(bound, ph, pr, pt);
  const Var dn = batch_distances(bound, nh, nr, nt);
  const Matrix w = adversarial_weights(dn.value().col(0), group, shape.temperature);
  const Var pos = ad::sum(ad::log_sigmoid(ad::add_scalar(ad::neg(dp), shape.gamma)));
  const Var neg = ad::sum(ad::hadamard(tape.constant(w), ad::log_sigmoid(ad::add_scalar(dn, -shape.gamma))));
  return ad::scale(ad::add(pos, neg), -0.5 / b);
}

double rotate_loss(const RotateModel& model, const std::vector<IndexedTriple>& triples,
                   const std::vector<std::vector<IndexedTriple>>& negatives) {
  require(!triples.empty() && triples.size() == negatives.size(), ErrorCode::invalid_argument,
          "RotatE loss needs one negative group per triple");
  double pos = 0.0, neg = 0.0;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    pos += log_sigmoid(model.gamma - model.distance(t.head, t.relation, t.tail));
    Vector d(static_cast<Index>(negatives[i].size()));
    for (std::size_t j = 0; j < negatives[i].size(); ++j) {
      const auto& n = negatives[i][j];
      d(static_cast<Index>(j)) = model.distance(n.head, n.relation, n.tail);
    }
    const Vector w = adversarial_weights(d, negatives[i].size(), model.temperature);
    for (Index j = 0; j < d.size(); ++j) neg += w(j) * log_sigmoid(d(j) - model.gamma);
  }
  return -0.5 * (pos + neg) / static_cast<double>(triples.size());
}

RotateResult train_rotate(const data::KnowledgeGraph& kg, const RotateConfig& config,
                          const std::vector<IndexedTriple>* train, const RotateStepObserver& on_step) {
  config.validate();
  require(kg.triple_count() > 0, ErrorCode::validation, "cannot train RotatE on an empty graph");
  const std::vector<IndexedTriple>& triples = train ? *train : kg.triples();
  require(!triples.empty(), ErrorCode::validation, "cannot train RotatE without training triples");

  RotateResult result;
  RotateModel& model = result.model;
  for (const auto& e : kg.entities()) model.entity_ids.push_back(e.ref.id);
  model.relations = kg.relations();
  model.gamma = config.gamma;
  model.temperature = config.temperature;
  model.negatives = config.negatives;

  Rng init = make_rng(config.seed, "rotate.init");
  const double range = (config.gamma + 2.0) / static_cast<double>(config.dim);
  const auto n = static_cast<Index>(kg.entity_count()), r = static_cast<Index>(kg.relation_count());
  num::ParamSet params;
  params.add("re", random_uniform(n, config.dim, -range, range, init));
  params.add("im", random_uniform(n, config.dim, -range, range, init));
  params.add("phase", random_uniform(r, config.dim, -std::numbers::pi, std::numbers::pi, init));

  Rng neg_rng = make_rng(config.seed, "rotate.negatives");
  const auto negatives = sample_negatives(kg, triples, config.negatives, neg_rng);
  Rng batch_rng = make_rng(config.seed, "rotate.batches");

  auto sync = [&] {
    model.re = params.get("re");
    model.im = params.get("im");
    model.phase = params.get("phase");
  };
  sync();
  double current = rotate_loss(model, triples, negatives);
  require(std::isfinite(current), ErrorCode::non_finite, "RotatE loss is not finite");
  result.history.push_back(current);

  num::AdamState state = num::make_adam_state(params.values());
  num::AdamConfig adam;
  adam.lr = config.learning_rate;
  std::vector<std::size_t> order(triples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const std::vector<Matrix> saved = params.values();
    const num::AdamState saved_state = state;
    std::shuffle(order.begin(), order.end(), batch_rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<IndexedTriple> batch;
      std::vector<std::vector<IndexedTriple>> batch_neg;
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(triples[order[k]]);
        batch_neg.push_back(negatives[order[k]]);
      }
      num::Tape tape;
      auto bound = num::bind(tape, params);
      Var loss = rotate_batch_loss(tape, bound, model, batch, batch_neg);
      require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "RotatE loss is not finite");
      tape.backward(loss);
      num::adam_step(params.values(), bound.grads(tape), state, adam);
      if (on_step) on_step(params.get("phase"));
    }
    sync();
    const double next = rotate_loss(model, triples, negatives);
    require(std::isfinite(next), ErrorCode::non_finite, "RotatE loss is not finite");
    if (next <= current) {
      current = next;
      result.history.push_back(current);
      adam.lr = std::min(config.learning_rate, adam.lr * 1.25);
    } else {
      params.values() = saved;
      state = saved_state;
      sync();
      adam.lr *= 0.5;
      ++result.rejected_epochs;
      if (adam.lr < config.learning_rate * 1e-9) break;
    }
  }
  return result;
}

namespace {

void check_alignment(const RotateModel& model, const data::KnowledgeGraph& kg) {
  bool same = model.entity_ids.size() == kg.entity_count() && model.relations == kg.relations();
  for (std::size_t i = 0; same && i < model.entity_ids.size(); ++i) same = model.entity_ids[i] == kg.entity(i).ref.id;
  require(same, ErrorCode::fingerprint, "RotatE model was trained on a different knowledge graph");
}

}  // namespace

predict::RankedList rank_candidates(const RotateModel& model, const data::KnowledgeGraph& kg,
                                    const CandidateQuery& query) {
  check_alignment(model, kg);
  const std::size_t q = kg.entity_index(query.query);
  const std::size_t r = kg.relation_index(query.relation);
  const data::EntityKind qk = kg.entity(q).ref.kind, ck = query.candidate_kind;
  bool query_head = false, query_tail = false;
  for (const auto& t : kg.triples()) {
    if (t.relation != r) continue;
    const auto hk = kg.entity(t.head).ref.kind, tk = kg.entity(t.tail).ref.kind;
    query_head |= hk == qk && tk == ck;
    query_tail |= hk == ck && tk == qk;
  }
  require(query_head || query_tail, ErrorCode::invalid_argument,
          "relation '" + query.relation + "' is never observed between " + std::string(data::to_string(qk)) +
              " and " + std::string(data::to_string(ck)) + " entities");

  const std::vector<std::size_t> pool = kg.entities_of_kind(ck);
  require(!pool.empty(), ErrorCode::not_found, "no " + std::string(data::to_string(ck)) + " entities to rank");
  std::vector<data::EntityRef> candidates;
  std::vector<bool> exclude;
  Vector scores(static_cast<Index>(pool.size()));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const std::size_t c = pool[i];
    const IndexedTriple t = query_head ? IndexedTriple{q, r, c} : IndexedTriple{c, r, q};
    candidates.push_back(kg.entity(c).ref);
    scores(static_cast<Index>(i)) = -model.distance(t.head, t.relation, t.tail);
    exclude.push_back(c == q || (query.filter_known && kg.contains(t)));
  }
  predict::RankedList out;
  out.query = kg.entity(q).ref;
  out.model = "rotate";
  out.entries = predict::rank_entities(candidates, scores, query.top_n, &exclude);
  return out;
}

HitsReport filtered_hits_at_k(const RotateModel& model, const std::vector<IndexedTriple>& test,
                              const std::vector<IndexedTriple>& known, int k) {
  require(!test.empty(), ErrorCode::invalid_argument, "Hits@k needs test triples");
  require(k >= 1, ErrorCode::invalid_argument, "Hits@k needs k >= 1");
  const std::set<IndexedTriple> filter(known.begin(), known.end());
  HitsReport report;
  double hits = 0.0, rank_sum = 0.0;
  for (const auto& t : test) {
    for (bool tail_slot : {true, false}) {
      const Vector d = tail_slot ? model.distances_as_tail(t.head, t.relation) : model.distances_as_head(t.relation, t.tail);
      const double truth = d(static_cast<Index>(tail_slot ? t.tail : t.head));
      std::size_t rank = 1;
      for (std::size_t e = 0; e < model.entity_ids.size(); ++e) {
        if (e == (tail_slot ? t.tail : t.head)) continue;
        const IndexedTriple alt = tail_slot ? IndexedTriple{t.head, t.relation, e} : IndexedTriple{e, t.relation, t.tail};
        if (filter.count(alt)) continue;
        // Ties count against the true entity.
        if (d(static_cast<Index>(e)) <= truth) ++rank;
      }
      rank_sum += static_cast<double>(rank);
      if (rank <= static_cast<std::size_t>(k)) hits += 1.0;
      ++report.queries;
    }
  }
  report.hits = hits / static_cast<double>(report.queries);
  report.mean_rank = rank_sum / static_cast<double>(report.queries);
  return report;
}

}  // namespace repositioner::kge
