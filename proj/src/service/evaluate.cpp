#include "repositioner/service/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace repositioner::service {

using data::EntityKind;

namespace {

using Pair = std::pair<std::string, std::string>;

bool joins(const std::set<Pair>& pairs, const std::string& a, const std::string& b) {
  return pairs.count({a, b}) != 0 || pairs.count({b, a}) != 0;
}

}  // namespace

HoldoutSplit holdout_split(const data::Dataset& dataset, Center center, double fraction, std::uint64_t seed) {
  require(fraction > 0.0 && fraction < 1.0, ErrorCode::invalid_argument, "held-out fraction must lie in (0, 1)");
  const EntityKind qk = query_kind(center);
  const data::NetworkLayer* layer = dataset.networks.find_layer(EntityKind::drug, qk);
  require(layer != nullptr, ErrorCode::validation,
          "evaluation needs a drug-" + std::string(data::to_string(qk)) + " layer");
  const data::Vocabulary& drugs = dataset.networks.vocab(EntityKind::drug);
  const data::Vocabulary& queries = dataset.networks.vocab(qk);

  std::vector<std::pair<Index, Index>> links;
  for (Index i = 0; i < layer->adjacency.outerSize(); ++i)
    for (data::SparseMatrix::InnerIterator it(layer->adjacency, i); it; ++it)
      if (it.value() != 0.0) links.emplace_back(it.row(), it.col());
  require(links.size() >= 2, ErrorCode::validation, "evaluation needs at least two known links");
  Rng rng = make_rng(seed, "eval.holdout");
  std::shuffle(links.begin(), links.end(), rng);
  const auto count = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::lround(fraction * static_cast<double>(links.size()))), 1, links.size() - 1);
  links.resize(count);
  std::sort(links.begin(), links.end());

  HoldoutSplit split;
  std::set<Pair> hidden;
  for (const auto& [i, j] : links) {
    split.held_out.emplace_back(drugs.id(static_cast<std::size_t>(i)), queries.id(static_cast<std::size_t>(j)));
    hidden.insert(split.held_out.back());
  }

  data::Dataset& train = split.train;
  for (const auto& [kind, vocab] : dataset.networks.vocabs()) train.networks.add_vocabulary(vocab);
  for (const auto& l : dataset.networks.layers()) {
    data::NetworkLayer copy = l;
    if (l.row_kind == EntityKind::drug && l.col_kind == qk) {
      for (const auto& [d, q] : split.held_out) {
        const auto di = static_cast<Index>(drugs.index_of(d)), qi = static_cast<Index>(queries.index_of(q));
        if (copy.adjacency.coeff(di, qi) != 0.0) copy.adjacency.coeffRef(di, qi) = 0.0;
      }
      copy.adjacency.prune(0.0);
    }
    train.networks.add_layer(std::move(copy));
  }
  if (dataset.kg) {
    std::vector<data::Triple> kept;
    for (std::size_t t = 0; t < dataset.kg->triple_count(); ++t) {
      data::Triple tr = dataset.kg->triple(t);
      if (!joins(hidden, tr.head, tr.tail)) kept.push_back(std::move(tr));
    }
    train.kg = data::KnowledgeGraph(dataset.kg->entities(), kept);
  }
  train.features = dataset.features;
  train.drug_records = dataset.drug_records;
  train.molecules = dataset.molecules;
  train.proteins = dataset.proteins;
  for (const auto& p : dataset.dti_pairs)
    if (!joins(hidden, p.first, p.second)) train.dti_pairs.push_back(p);
  for (const auto& p : dataset.cpi_pairs)
    if (!joins(hidden, p.first, p.second)) train.cpi_pairs.push_back(p);
  train.directory = dataset.directory;
  train.fingerprint = data::vocabulary_fingerprint(train);
  return split;
}

EvalReport evaluate_holdout(ModelKind kind, const data::Dataset& dataset, const TrainOptions& options,
                            double fraction, int k) {
  require(k >= 1, ErrorCode::invalid_argument, "hits@k needs k >= 1");
  const Center center = center_of(kind);
  const EntityKind qk = query_kind(center);
  const HoldoutSplit split = holdout_split(dataset, center, fraction, options.seed);
  const auto model = train_model(kind, split.train, options);

  std::set<Pair> linked;
  const data::NetworkLayer* layer = dataset.networks.find_layer(EntityKind::drug, qk);
  const data::Vocabulary& drugs = dataset.networks.vocab(EntityKind::drug);
  const data::Vocabulary& queries = dataset.networks.vocab(qk);
  for (Index i = 0; i < layer->adjacency.outerSize(); ++i)
    for (data::SparseMatrix::InnerIterator it(layer->adjacency, i); it; ++it)
      linked.insert({drugs.id(static_cast<std::size_t>(it.row())), queries.id(static_cast<std::size_t>(it.col()))});
  if (dataset.kg)
    for (std::size_t t = 0; t < dataset.kg->triple_count(); ++t) {
      const data::Triple tr = dataset.kg->triple(t);
      linked.insert({tr.head, tr.tail});
      linked.insert({tr.tail, tr.head});
    }

  std::map<std::string, std::set<std::string>> by_query;
  for (const auto& [d, q] : split.held_out) by_query[q].insert(d);

  EvalReport report;
  report.held_out = split.held_out.size();
  report.k = k;
  std::size_t scored_links = 0, hits = 0;
  double auroc_sum = 0.0;
  std::size_t auroc_queries = 0;
  for (const auto& [q, positives] : by_query) {
    if (!model->covers(q)) continue;
    ++report.queries;
    scored_links += positives.size();
    const data::EntityRef query = data::resolve_entity(dataset.directory, q, qk);
    const predict::RankedList list = model->rank(query, drugs.size());
    std::vector<double> pos, neg;
    for (const auto& e : list.entries) {
      if (positives.count(e.entity.id))
        pos.push_back(e.score);
      else if (!linked.count({e.entity.id, q}))
        neg.push_back(e.score);
    }
    for (double s : pos) {
      const auto above = std::count_if(neg.begin(), neg.end(), [s](double n) { return n >= s; });
      if (above < k) ++hits;
    }
    if (!pos.empty() && !neg.empty()) {
      std::vector<double> scores = pos;
      scores.insert(scores.end(), neg.begin(), neg.end());
      std::vector<int> labels(pos.size(), 1);
      labels.resize(scores.size(), 0);
      auroc_sum += predict::compute_auroc(scores, labels);
      ++auroc_queries;
    }
  }
  report.auroc = auroc_queries ? auroc_sum / static_cast<double>(auroc_queries) : 0.0;
  report.hits = scored_links ? static_cast<double>(hits) / static_cast<double>(scored_links) : 0.0;
  return report;
}

}  // namespace repositioner::service
