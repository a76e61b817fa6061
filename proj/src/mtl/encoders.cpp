#include "repositioner/mtl/encoders.hpp"

#include "repositioner/numerics/ffn.hpp"

#include <algorithm>

namespace repositioner::mtl {

namespace ad = num::ad;
using num::Var;

RelationalGraph RelationalGraph::from_edges(Index nodes, std::vector<std::string> relations,
                                            const std::vector<Edge>& edges) {
  RelationalGraph g;
  g.nodes = nodes;
  g.relations = std::move(relations);
  std::vector<Matrix> adjacency(g.relations.size(), Matrix::Zero(nodes, nodes));
  for (const auto& e : edges) {
    require(e.relation < g.relations.size(), ErrorCode::not_found, "edge relation has no weight slot");
    require(e.head >= 0 && e.head < nodes && e.tail >= 0 && e.tail < nodes, ErrorCode::invalid_argument,
            "edge endpoint outside the graph");
    if (e.head == e.tail) continue;
    adjacency[e.relation](e.head, e.tail) = 1.0;
    adjacency[e.relation](e.tail, e.head) = 1.0;
  }
  for (auto& a : adjacency) {
    for (Index i = 0; i < nodes; ++i) {
      const double degree = a.row(i).sum();
      if (degree > 0) a.row(i) /= degree;
    }
    g.mean_ops.push_back(std::move(a));
  }
  return g;
}

std::string rgcn_weight(int layer, std::size_t relation) {
  return "rgcn.W" + std::to_string(layer) + "." + std::to_string(relation);
}

std::string rgcn_self_weight(int layer) { return "rgcn.Wo" + std::to_string(layer); }

void add_rgcn_params(num::ParamSet& params, const RelationalGraph& graph, int layers, Index dim, Rng& rng) {
  require(layers >= 1, ErrorCode::invalid_argument, "RGCN needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    for (std::size_t r = 0; r < graph.relations.size(); ++r) params.add(rgcn_weight(l, r), num::glorot(dim, dim, rng));
    params.add(rgcn_self_weight(l), num::glorot(dim, dim, rng));
  }
}

Var rgcn_layer(const num::BoundParams& bound, const RelationalGraph& graph, const Var& h, int layer,
               num::Activation activation) {
  require(h.rows() == graph.nodes, ErrorCode::dimension_mismatch,
          "RGCN input has " + std::to_string(h.rows()) + " rows for " + std::to_string(graph.nodes) + " nodes");
  num::Tape& tape = *h.tape();
  require(bound.source->contains(rgcn_self_weight(layer)), ErrorCode::not_found,
          "missing RGCN self-loop weight for layer " + std::to_string(layer));
  Var acc = ad::matmul(h, bound[rgcn_self_weight(layer)]);
  for (std::size_t r = 0; r < graph.relations.size(); ++r) {
    const std::string name = rgcn_weight(layer, r);
    require(bound.source->contains(name), ErrorCode::not_found,
            "missing RGCN weight for relation '" + graph.relations[r] + "' in layer " + std::to_string(layer));
    acc = ad::add(acc, ad::matmul(tape.constant(graph.mean_ops[r]), ad::matmul(h, bound[name])));
  }
  return ad::activate(acc, activation);
}

Var rgcn_forward(const num::BoundParams& bound, const RelationalGraph& graph, const Var& x0, int layers,
                 num::Activation activation) {
  Var h = x0;
  for (int l = 0; l < layers; ++l) h = rgcn_layer(bound, graph, h, l, activation);
  return h;
}

Matrix rgcn_forward(const num::ParamSet& params, const RelationalGraph& graph, const Matrix& x0, int layers,
                    num::Activation activation) {
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  return rgcn_forward(bound, graph, tape.constant(x0), layers, activation).value();
}

void add_gcn_params(num::ParamSet& params, int layers, Index dim, Rng& rng) {
  require(layers >= 1, ErrorCode::invalid_argument, "molecular GCN needs at least one layer");
  for (int l = 0; l < layers; ++l) {
    params.add("gcn.W" + std::to_string(l), num::glorot(l == 0 ? data::kAtomFeatureDim : dim, dim, rng));
    params.add("gcn.b" + std::to_string(l), Matrix::Zero(1, dim));
  }
}

Var mol_gcn_readout(const num::BoundParams& bound, num::Tape& tape, const data::MoleculeGraph& mol, int layers) {
  require(mol.atoms.rows() > 0, ErrorCode::validation, "molecule '" + mol.id + "' has no atoms");
  mol.validate();
  const Index n = mol.atoms.rows();
  Matrix op = Matrix::Identity(n, n);
  for (const auto& [a, b] : mol.bonds) {
    if (a == b) continue;
    op(a, b) = 1.0;
    op(b, a) = 1.0;
  }
  const Var prop = tape.constant(op);
  Var h = tape.constant(mol.atoms);
  for (int l = 0; l < layers; ++l)
    h = ad::relu(ad::add_row(ad::matmul(prop, ad::matmul(h, bound["gcn.W" + std::to_string(l)])),
                             bound["gcn.b" + std::to_string(l)]));
  return ad::mean_rows(h);
}

Matrix mol_gcn_readout(const num::ParamSet& params, const data::MoleculeGraph& mol, int layers) {
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  return mol_gcn_readout(bound, tape, mol, layers).value();
}

void add_protein_params(num::ParamSet& params, const ProteinEncoderShape& shape, Rng& rng) {
  require(!shape.kernel_widths.empty(), ErrorCode::invalid_argument, "protein encoder needs a kernel width");
  params.add("prot.embed", random_normal(static_cast<Index>(data::kAminoAlphabet.size()), shape.residue_dim, 0.3, rng));
  for (Index w : shape.kernel_widths) {
    require(w >= 1, ErrorCode::invalid_argument, "kernel width must be positive");
    params.add("prot.K" + std::to_string(w), num::glorot(w * shape.residue_dim, shape.channels, rng));
    params.add("prot.c" + std::to_string(w), Matrix::Zero(1, shape.channels));
  }
}

std::vector<Index> residue_indices(const std::string& sequence) {
  std::vector<Index> out;
  out.reserve(sequence.size());
  for (char c : sequence) {
    const auto pos = data::kAminoAlphabet.find(c);
    require(pos != std::string_view::npos, ErrorCode::validation,
            std::string("illegal residue '") + c + "' in protein sequence");
    out.push_back(static_cast<Index>(pos));
  }
  return out;
}

Var protein_encode(const num::BoundParams& bound, const ProteinEncoderShape& shape, const std::string& sequence) {
  const std::vector<Index> residues = residue_indices(sequence);
  const Index widest = *std::max_element(shape.kernel_widths.begin(), shape.kernel_widths.end());
  require(static_cast<Index>(residues.size()) >= widest, ErrorCode::validation,
          "protein sequence of length " + std::to_string(residues.size()) + " is shorter than kernel width " +
              std::to_string(widest));
  const Var embedded = ad::gather_rows(bound["prot.embed"], residues);
  std::vector<Var> pooled;
  for (Index w : shape.kernel_widths) {
    const Var conv = ad::add_row(ad::matmul(ad::unfold_rows(embedded, w), bound["prot.K" + std::to_string(w)]),
                                 bound["prot.c" + std::to_string(w)]);
    pooled.push_back(ad::max_rows(ad::relu(conv)));
  }
  return ad::concat_cols(pooled);
}

Matrix protein_encode(const num::ParamSet& params, const ProteinEncoderShape& shape, const std::string& sequence) {
  num::Tape tape;
  const auto bound = num::bind(tape, params);
  return protein_encode(bound, shape, sequence).value();
}

void add_shared_unit_params(num::ParamSet& params, Index dim, Rng& rng) {
  for (const char* name : {"su.w_dd", "su.w_gg"}) params.add(name, Matrix::Ones(1, dim));
  for (const char* name : {"su.w_gd", "su.w_dg"}) params.add(name, Matrix::Zero(1, dim));
  for (const char* name : {"su.v_dd", "su.v_gd", "su.v_gg", "su.v_dg"})
    params.add(name, random_normal(dim, 1, 1.0, rng));
  params.add("su.b_d", Matrix::Zero(1, dim));
  params.add("su.b_g", Matrix::Zero(1, dim));
}

SharedUnitOutput shared_unit_apply(const num::BoundParams& bound, const Var& x_d, const Var& x_g) {
  require(x_d.rows() == x_g.rows() && x_d.cols() == x_g.cols(), ErrorCode::dimension_mismatch,
          "shared unit inputs must have the same shape");
  require(bound["su.w_dd"].cols() == x_d.cols(), ErrorCode::dimension_mismatch,
          "shared unit dimension " + std::to_string(bound["su.w_dd"].cols()) + " does not match input dimension " +
              std::to_string(x_d.cols()));
  const Var rd = ad::add(ad::mul_row(x_d, bound["su.w_dd"]), ad::mul_row(x_g, bound["su.w_gd"]));
  const Var rg = ad::add(ad::mul_row(x_g, bound["su.w_gg"]), ad::mul_row(x_d, bound["su.w_dg"]));
  // C v = x'_d (x'_g . v) and C^T v = x'_g (x'_d . v) row by row.
  auto cross = [&](const char* v, const char* vt, const char* b) {
    return ad::add_row(ad::add(ad::mul_col(rd, ad::matmul(rg, bound[v])), ad::mul_col(rg, ad::matmul(rd, bound[vt]))),
                       bound[b]);
  };
  return {cross("su.v_dd", "su.v_gd", "su.b_d"), cross("su.v_gg", "su.v_dg", "su.b_g")};
}

SharedUnitValues shared_unit_apply(const num::ParamSet& params, const Eigen::RowVectorXd& x_d,
                                   const Eigen::RowVectorXd& x_g) {
  require(x_d.size() == x_g.size() && x_d.size() == params.get("su.w_dd").cols(), ErrorCode::dimension_mismatch,
          "shared unit inputs must match the unit dimension");
  SharedUnitValues out;
  out.reconstructed_drug = x_d.cwiseProduct(params.get("su.w_dd").row(0)) + x_g.cwiseProduct(params.get("su.w_gd").row(0));
  out.reconstructed_molecule =
      x_g.cwiseProduct(params.get("su.w_gg").row(0)) + x_d.cwiseProduct(params.get("su.w_dg").row(0));
  out.cross = out.reconstructed_drug.transpose() * out.reconstructed_molecule;
  out.drug = (out.cross * params.get("su.v_dd") + out.cross.transpose() * params.get("su.v_gd")).transpose() +
             params.get("su.b_d");
  out.molecule = (out.cross * params.get("su.v_gg") + out.cross.transpose() * params.get("su.v_dg")).transpose() +
                 params.get("su.b_g");
  return out;
}

}  // namespace repositioner::mtl
