#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace repositioner::predict {

// Heterogeneous graph with nodes laid out in contiguous per-type blocks and one
// symmetric adjacency matrix per edge type.
struct HetGraph {
  std::vector<std::string> types;
  std::vector<Index> counts;
  std::vector<std::string> edge_names;
  std::vector<Matrix> edges;

  Index size() const;
  Index offset(int type) const;
  int type_of(Index node) const;
  int type_index(const std::string& name) const;
  void validate() const;
  // Row-normalized neighbor indicator for one edge type (rows without
  // neighbors stay zero, so their mean is the zero vector).
  Matrix mean_operator(std::size_t edge_type) const;
};

struct HetGnnConfig {
  Index neighbor_dim = 32;   // f_n
  Index output_dim = 32;     // f_o
  Index attention_dim = 16;  // d_a
  int layers = 2;
  double alpha = 1.0;
  double beta = 1.0;
};

// Parameters: het.g<t>, het.b<t>, het.d<t> per node type, het.W<l> per layer,
// het.M, het.att.W, het.att.w.
num::ParamSet make_hetgnn_params(const std::vector<Index>& feature_dims, const HetGnnConfig& config, Rng& rng);

// Overall embeddings v (n x f_o). features[t] holds the rows of type t.
num::Var hetgnn_forward(num::Tape& tape, const num::BoundParams& bound, const HetGraph& graph,
                        const std::vector<Matrix>& features, const HetGnnConfig& config);
Matrix hetgnn_embed(const HetGraph& graph, const std::vector<Matrix>& features, const num::ParamSet& params,
                    const HetGnnConfig& config);

using MetaPath = std::vector<std::string>;  // node type sequence, first == last

struct WalkConfig {
  int walks_per_node = 10;
  int walk_length = 20;
  int window = 3;
  int negatives = 5;
};

struct WalkStats {
  std::size_t walks = 0;
  std::size_t skipped_isolated = 0;
};

// (center, context) pairs from meta-path guided walks.
std::vector<std::pair<Index, Index>> metapath_pairs(const HetGraph& graph, const std::vector<MetaPath>& paths,
                                                    const WalkConfig& config, Rng& rng, WalkStats* stats = nullptr);

// Negative-sampling objective; negatives[p] lists the sampled nodes for pair p.
num::Var skipgram_loss(const num::Var& embeddings, const num::Var& context,
                       const std::vector<std::pair<Index, Index>>& pairs,
                       const std::vector<std::vector<Index>>& negatives);

// exp(c_j . v) / sum_{k in partition} exp(c_k . v) for every j in partition.
Vector skipgram_probabilities(const Matrix& context, const Eigen::RowVectorXd& v, const std::vector<Index>& partition);

struct SkipGramConfig {
  std::vector<MetaPath> metapaths;
  WalkConfig walk;
  int epochs = 5;
  std::size_t batch_size = 256;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

struct SkipGramResult {
  num::ParamSet params;  // "v" (free table) or the het.* set, plus "context"
  Matrix embeddings;
  Matrix context;
  std::vector<double> history;  // mean pair loss per epoch
  WalkStats stats;
};

// Treats `embeddings` as a free table and refines it with the context vectors.
SkipGramResult skipgram_refine(const HetGraph& graph, const Matrix& embeddings, const SkipGramConfig& config);

// Trains the aggregation network end to end through the skip-gram objective.
SkipGramResult train_hetgnn(const HetGraph& graph, const std::vector<Matrix>& features, const HetGnnConfig& het,
                            const SkipGramConfig& config);

}  // namespace repositioner::predict
