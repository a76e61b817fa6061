#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/tables.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"

#include <string>
#include <vector>

namespace repositioner::mtl {

// Entities 0..n-1 with typed undirected edges; mean_ops[r] is the
// row-normalized adjacency of relation r (zero rows for nodes without an
// r-neighbour).
struct RelationalGraph {
  Index nodes = 0;
  std::vector<std::string> relations;
  std::vector<Matrix> mean_ops;

  struct Edge {
    Index head;
    std::size_t relation;
    Index tail;
  };
  static RelationalGraph from_edges(Index nodes, std::vector<std::string> relations, const std::vector<Edge>& edges);
};

std::string rgcn_weight(int layer, std::size_t relation);  // "rgcn.W<l>.<r>"
std::string rgcn_self_weight(int layer);                   // "rgcn.Wo<l>"

void add_rgcn_params(num::ParamSet& params, const RelationalGraph& graph, int layers, Index dim, Rng& rng);

// One relational convolution on row embeddings h (n x d):
//   act( sum_r mean_r h W_r + h W_o )
num::Var rgcn_layer(const num::BoundParams& bound, const RelationalGraph& graph, const num::Var& h, int layer,
                    num::Activation activation = num::Activation::relu);

num::Var rgcn_forward(const num::BoundParams& bound, const RelationalGraph& graph, const num::Var& x0, int layers,
                      num::Activation activation = num::Activation::relu);
Matrix rgcn_forward(const num::ParamSet& params, const RelationalGraph& graph, const Matrix& x0, int layers,
                    num::Activation activation = num::Activation::relu);

// Molecular GCN: h <- relu((A + I) h W_l + b_l) for each layer ("gcn.W<l>",
// "gcn.b<l>"), then the mean over atoms.
void add_gcn_params(num::ParamSet& params, int layers, Index dim, Rng& rng);
num::Var mol_gcn_readout(const num::BoundParams& bound, num::Tape& tape, const data::MoleculeGraph& mol, int layers);
Matrix mol_gcn_readout(const num::ParamSet& params, const data::MoleculeGraph& mol, int layers);

struct ProteinEncoderShape {
  Index residue_dim = 16;
  std::vector<Index> kernel_widths = {4, 8};
  Index channels = 32;

  Index output_dim() const { return channels * static_cast<Index>(kernel_widths.size()); }
};

// Residue table "prot.embed", per width w a kernel "prot.K<w>" and bias
// "prot.c<w>"; output is relu-convolved, max-pooled, concatenated over widths.
void add_protein_params(num::ParamSet& params, const ProteinEncoderShape& shape, Rng& rng);
std::vector<Index> residue_indices(const std::string& sequence);
num::Var protein_encode(const num::BoundParams& bound, const ProteinEncoderShape& shape, const std::string& sequence);
Matrix protein_encode(const num::ParamSet& params, const ProteinEncoderShape& shape, const std::string& sequence);

// Shared unit over rows of x_d and x_g (both m x d):
//   x'_d = x_d .* w_dd + x_g .* w_gd,   x'_g = x_g .* w_gg + x_d .* w_dg
//   C = x'_d x'_g^T per row pair
//   x''_d = C v_dd + C^T v_gd + b_d,    x''_g = C v_gg + C^T v_dg + b_g
// with row weights w_* (1 x d), column weights v_* (d x 1) and biases b (1 x d).
struct SharedUnitOutput {
  num::Var drug;
  num::Var molecule;
};
void add_shared_unit_params(num::ParamSet& params, Index dim, Rng& rng);
SharedUnitOutput shared_unit_apply(const num::BoundParams& bound, const num::Var& x_d, const num::Var& x_g);

struct SharedUnitValues {
  Eigen::RowVectorXd reconstructed_drug;
  Eigen::RowVectorXd reconstructed_molecule;
  Matrix cross;  // d x d
  Eigen::RowVectorXd drug;
  Eigen::RowVectorXd molecule;
};
// Single pair, materializing the cross matrix.
SharedUnitValues shared_unit_apply(const num::ParamSet& params, const Eigen::RowVectorXd& x_d,
                                   const Eigen::RowVectorXd& x_g);

}  // namespace repositioner::mtl
