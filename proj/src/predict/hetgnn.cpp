#include "repositioner/predict/hetgnn.hpp"

#include "repositioner/numerics/ffn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repositioner::predict {

using num::Var;
namespace ad = num::ad;

Index HetGraph::size() const { return std::accumulate(counts.begin(), counts.end(), Index{0}); }

Index HetGraph::offset(int type) const {
  return std::accumulate(counts.begin(), counts.begin() + type, Index{0});
}

int HetGraph::type_of(Index node) const {
  Index end = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    end += counts[t];
    if (node < end) return static_cast<int>(t);
  }
  fail(ErrorCode::not_found, "node " + std::to_string(node) + " is outside the graph");
}

int HetGraph::type_index(const std::string& name) const {
  auto it = std::find(types.begin(), types.end(), name);
  require(it != types.end(), ErrorCode::not_found, "graph has no node type '" + name + "'");
  return static_cast<int>(it - types.begin());
}

void HetGraph::validate() const {
  require(!types.empty() && types.size() == counts.size(), ErrorCode::validation, "graph needs one count per type");
  require(!edges.empty() && edges.size() == edge_names.size(), ErrorCode::validation,
          "graph needs at least one named edge type");
  const Index n = size();
  for (const auto& a : edges) {
    require(a.rows() == n && a.cols() == n, ErrorCode::dimension_mismatch, "edge matrix does not cover all nodes");
    require(a.minCoeff() >= 0.0 && all_finite(a), ErrorCode::validation, "edge weights must be finite and >= 0");
  }
}

Matrix HetGraph::mean_operator(std::size_t e) const {
  Matrix m = (edges.at(e).array() > 0.0).cast<double>();
  for (Index i = 0; i < m.rows(); ++i) {
    const double deg = m.row(i).sum();
    if (deg > 0.0) m.row(i) /= deg;
  }
  return m;
}

num::ParamSet make_hetgnn_params(const std::vector<Index>& feature_dims, const HetGnnConfig& c, Rng& rng) {
  require(c.layers >= 1, ErrorCode::invalid_argument, "hetGNN needs at least one aggregation layer");
  num::ParamSet p;
  for (std::size_t t = 0; t < feature_dims.size(); ++t) {
    const std::string s = std::to_string(t);
    p.add("het.g" + s, num::glorot(feature_dims[t], c.neighbor_dim, rng));
    p.add("het.b" + s, num::glorot(feature_dims[t], c.output_dim, rng));
    p.add("het.d" + s, num::glorot(feature_dims[t], c.output_dim, rng));
  }
  for (int l = 0; l < c.layers; ++l) p.add("het.W" + std::to_string(l), num::glorot(c.neighbor_dim, c.neighbor_dim, rng));
  p.add("het.M", num::glorot(c.neighbor_dim, c.output_dim, rng));
  p.add("het.att.W", num::glorot(c.attention_dim, c.neighbor_dim, rng));
  p.add("het.att.w", num::glorot(c.attention_dim, 1, rng));
  return p;
}

Var hetgnn_forward(num::Tape& tape, const num::BoundParams& bound, const HetGraph& graph,
                   const std::vector<Matrix>& features, const HetGnnConfig& c) {
  graph.validate();
  require(features.size() == graph.types.size(), ErrorCode::validation, "hetGNN needs features for every node type");
  std::vector<Var> initial, base;
  for (std::size_t t = 0; t < features.size(); ++t) {
    require(features[t].rows() == graph.counts[t], ErrorCode::validation,
            "missing features for node type '" + graph.types[t] + "'");
    const std::string s = std::to_string(t);
    require(bound.source->contains("het.g" + s) && bound.source->contains("het.b" + s) &&
                bound.source->contains("het.d" + s),
            ErrorCode::validation, "missing type transform for node type '" + graph.types[t] + "'");
    const Var x = tape.constant(features[t]);
    initial.push_back(ad::matmul(x, bound["het.g" + s]));
    base.push_back(ad::add(ad::matmul(x, bound["het.b" + s]), ad::scale(ad::matmul(x, bound["het.d" + s]), c.beta)));
  }
  const Var h0 = ad::concat_rows(initial);
  std::vector<Var> per_edge, scores;
  const Var att_w_t = ad::transpose(bound["het.att.W"]);
  for (std::size_t e = 0; e < graph.edges.size(); ++e) {
    const Var mean = tape.constant(graph.mean_operator(e));
    Var h = h0;
    for (int l = 0; l < c.layers; ++l) h = ad::relu(ad::matmul(ad::matmul(mean, h), bound["het.W" + std::to_string(l)]));
    per_edge.push_back(h);
    scores.push_back(ad::matmul(ad::tanh(ad::matmul(h, att_w_t)), bound["het.att.w"]));
  }
  const Var r = ad::softmax_rows(ad::concat_cols(scores));
  Var agg;
  for (std::size_t e = 0; e < per_edge.size(); ++e) {
    const Var term = ad::mul_col(per_edge[e], ad::slice_cols(r, static_cast<Index>(e), 1));
    agg = e == 0 ? term : ad::add(agg, term);
  }
  return ad::add(ad::concat_rows(base), ad::scale(ad::matmul(agg, bound["het.M"]), c.alpha));
}

Matrix hetgnn_embed(const HetGraph& graph, const std::vector<Matrix>& features, const num::ParamSet& params,
                    const HetGnnConfig& config) {
  num::Tape tape;
  auto bound = num::bind(tape, params);
  return hetgnn_forward(tape, bound, graph, features, config).value();
}

std::vector<std::pair<Index, Index>> metapath_pairs(const HetGraph& graph, const std::vector<MetaPath>& paths,
                                                    const WalkConfig& config, Rng& rng, WalkStats* stats) {
  require(config.walk_length >= 2 && config.window >= 1 && config.walks_per_node >= 1, ErrorCode::invalid_argument,
          "walk length, window and walk count must be positive");
  const Index n = graph.size();
  // Neighbor lists over the union of edge types, in index order.
  std::vector<std::vector<Index>> neighbors(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      for (const auto& a : graph.edges)
        if (a(i, j) > 0.0 && i != j) {
          neighbors[static_cast<std::size_t>(i)].push_back(j);
          break;
        }

  WalkStats local;
  std::vector<std::pair<Index, Index>> pairs;
  for (const auto& path : paths) {
    require(path.size() >= 2 && path.front() == path.back(), ErrorCode::invalid_argument,
            "meta-paths must have at least two node types and start and end on the same type");
    std::vector<int> types;
    for (const auto& name : path) types.push_back(graph.type_index(name));
    const std::size_t cycle = types.size() - 1;
    const Index begin = graph.offset(types[0]);
    for (Index start = begin; start < begin + graph.counts[static_cast<std::size_t>(types[0])]; ++start) {
      for (int w = 0; w < config.walks_per_node; ++w) {
        std::vector<Index> walk{start};
        for (int step = 1; step < config.walk_length; ++step) {
          const int want = types[static_cast<std::size_t>(step) % cycle];
          std::vector<Index> options;
          for (Index j : neighbors[static_cast<std::size_t>(walk.back())])
            if (graph.type_of(j) == want) options.push_back(j);
          if (options.empty()) break;
          walk.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
        }
        if (walk.size() < 2) {  // every walk from this node would stall
          ++local.skipped_isolated;
          break;
        }
        ++local.walks;
        const Index len = static_cast<Index>(walk.size());
        for (Index i = 0; i < len; ++i)
          for (Index j = std::max<Index>(0, i - config.window); j <= std::min(len - 1, i + config.window); ++j)
            if (j != i) pairs.emplace_back(walk[static_cast<std::size_t>(i)], walk[static_cast<std::size_t>(j)]);
      }
    }
  }
  if (stats) *stats = local;
  return pairs;
}

Var skipgram_loss(const Var& v, const Var& c, const std::vector<std::pair<Index, Index>>& pairs,
                  const std::vector<std::vector<Index>>& negatives) {
  require(v.cols() == c.cols(), ErrorCode::dimension_mismatch, "context and node embeddings must share a dimension");
  require(negatives.size() == pairs.size(), ErrorCode::dimension_mismatch, "one negative list per pair");
  std::vector<Index> centers, contexts, neg_centers, neg_nodes;
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    centers.push_back(pairs[p].first);
    contexts.push_back(pairs[p].second);
    for (Index k : negatives[p]) {
      neg_centers.push_back(pairs[p].first);
      neg_nodes.push_back(k);
    }
  }
  Var loss = ad::neg(ad::sum(ad::log_sigmoid(ad::row_dot(ad::gather_rows(v, centers), ad::gather_rows(c, contexts)))));
  if (!neg_nodes.empty()) {
    const Var dots = ad::row_dot(ad::gather_rows(v, neg_centers), ad::gather_rows(c, neg_nodes));
    loss = ad::sub(loss, ad::sum(ad::log_sigmoid(ad::neg(dots))));
  }
  return loss;
}

Vector skipgram_probabilities(const Matrix& context, const Eigen::RowVectorXd& v, const std::vector<Index>& partition) {
  require(!partition.empty(), ErrorCode::invalid_argument, "partition is empty");
  Vector logits(static_cast<Index>(partition.size()));
  for (std::size_t k = 0; k < partition.size(); ++k) logits(static_cast<Index>(k)) = context.row(partition[k]).dot(v);
  const double top = logits.maxCoeff();
  Vector e = (logits.array() - top).exp();
  return e / e.sum();
}

namespace {

using EmbedFn = std::function<Var(num::Tape&, const num::BoundParams&)>;

SkipGramResult run_skipgram(const HetGraph& graph, num::ParamSet params, const EmbedFn& embed,
                            const SkipGramConfig& config) {
  graph.validate();
  require(config.walk.negatives >= 1, ErrorCode::invalid_argument, "skip-gram needs at least one negative");
  require(config.batch_size >= 1 && config.epochs >= 1, ErrorCode::invalid_argument,
          "skip-gram batch size and epochs must be positive");
  SkipGramResult result;
  Rng walk_rng = make_rng(config.seed, "skipgram.walks");
  auto pairs = metapath_pairs(graph, config.metapaths, config.walk, walk_rng, &result.stats);
  require(!pairs.empty(), ErrorCode::validation, "meta-path walks produced no training pairs");

  Rng sample_rng = make_rng(config.seed, "skipgram.negatives");
  num::AdamConfig adam;
  adam.lr = config.learning_rate;
  auto state = num::make_adam_state(params.values());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(pairs.begin(), pairs.end(), sample_rng);
    double total = 0.0;
    for (std::size_t start = 0; start < pairs.size(); start += config.batch_size) {
      const std::size_t end = std::min(pairs.size(), start + config.batch_size);
      std::vector<std::pair<Index, Index>> batch(pairs.begin() + static_cast<std::ptrdiff_t>(start),
                                                 pairs.begin() + static_cast<std::ptrdiff_t>(end));
      std::vector<std::vector<Index>> negatives;
      for (const auto& [center, ctx] : batch) {
        const int t = graph.type_of(ctx);
        std::uniform_int_distribution<Index> pick(graph.offset(t), graph.offset(t) + graph.counts[static_cast<std::size_t>(t)] - 1);
        std::vector<Index> neg;
        for (int k = 0; k < config.walk.negatives; ++k) neg.push_back(pick(sample_rng));
        negatives.push_back(std::move(neg));
      }
      num::Tape tape;
      auto bound = num::bind(tape, params);
      Var loss = skipgram_loss(embed(tape, bound), bound["context"], batch, negatives);
      require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "skip-gram loss is not finite");
      total += loss.scalar();
      tape.backward(loss);
      std::vector<bool> touched;
      auto grads = bound.grads(tape, &touched);
      num::adam_step(params.values(), grads, state, adam, &touched);
    }
    result.history.push_back(total / static_cast<double>(pairs.size()));
  }
  num::Tape tape;
  auto bound = num::bind(tape, params);
  result.embeddings = embed(tape, bound).value();
  result.context = params.get("context");
  result.params = std::move(params);
  return result;
}

}  // namespace

SkipGramResult skipgram_refine(const HetGraph& graph, const Matrix& embeddings, const SkipGramConfig& config) {
  require(embeddings.rows() == graph.size(), ErrorCode::dimension_mismatch, "one embedding row per node");
  num::ParamSet params;
  params.add("v", embeddings);
  Rng rng = make_rng(config.seed, "skipgram.context");
  params.add("context", random_normal(embeddings.rows(), embeddings.cols(), 0.1, rng));
  return run_skipgram(graph, std::move(params), [](num::Tape&, const num::BoundParams& b) { return b["v"]; }, config);
}

SkipGramResult train_hetgnn(const HetGraph& graph, const std::vector<Matrix>& features, const HetGnnConfig& het,
                            const SkipGramConfig& config) {
  std::vector<Index> dims;
  for (const auto& f : features) dims.push_back(f.cols());
  Rng init = make_rng(config.seed, "hetgnn.init");
  num::ParamSet params = make_hetgnn_params(dims, het, init);
  Rng rng = make_rng(config.seed, "skipgram.context");
  params.add("context", random_normal(graph.size(), het.output_dim, 0.1, rng));
  return run_skipgram(
      graph, std::move(params),
      [&](num::Tape& tape, const num::BoundParams& b) { return hetgnn_forward(tape, b, graph, features, het); },
      config);
}

}  // namespace repositioner::predict
