#include "repositioner/data/network.hpp"

#include "repositioner/data/key_value.hpp"
#include "text_io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace repositioner::data {

void AssociationMatrix::validate() const {
  for (Index i = 0; i < entries.rows(); ++i)
    for (Index j = 0; j < entries.cols(); ++j)
      require(entries(i, j) == 0.0 || entries(i, j) == 1.0, ErrorCode::validation,
              "association entries must be 0 or 1");
}

const NetworkLayer& LayeredNetworkSet::layer(const std::string& name) const {
  for (const auto& l : layers_)
    if (l.name == name) return l;
  fail(ErrorCode::not_found, "no network layer named '" + name + "'");
}

bool LayeredNetworkSet::has_layer(const std::string& name) const {
  return std::any_of(layers_.begin(), layers_.end(),
                     [&](const NetworkLayer& l) { return l.name == name; });
}

const Vocabulary& LayeredNetworkSet::vocab(EntityKind kind) const {
  auto it = vocabs_.find(kind);
  if (it == vocabs_.end())
    fail(ErrorCode::not_found, "no " + std::string(to_string(kind)) + " vocabulary loaded");
  return it->second;
}

std::vector<const NetworkLayer*> LayeredNetworkSet::square_layers(
    EntityKind kind, const std::vector<std::string>& exclude) const {
  std::vector<const NetworkLayer*> out;
  for (const auto& l : layers_) {
    if (l.row_kind != kind || l.col_kind != kind) continue;
    if (std::find(exclude.begin(), exclude.end(), l.name) != exclude.end()) continue;
    out.push_back(&l);
  }
  return out;
}

const NetworkLayer* LayeredNetworkSet::find_layer(EntityKind row_kind, EntityKind col_kind) const {
  for (const auto& l : layers_)
    if (l.row_kind == row_kind && l.col_kind == col_kind) return &l;
  return nullptr;
}

AssociationMatrix LayeredNetworkSet::association(EntityKind row_kind, EntityKind col_kind) const {
  const NetworkLayer* l = find_layer(row_kind, col_kind);
  if (!l)
    fail(ErrorCode::not_found, "no " + std::string(to_string(row_kind)) + "-" +
                                   std::string(to_string(col_kind)) + " layer loaded");
  AssociationMatrix out{row_kind, col_kind, Matrix::Zero(l->adjacency.rows(), l->adjacency.cols())};
  for (Index i = 0; i < l->adjacency.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(l->adjacency, i); it; ++it)
      if (it.value() > 0.0) out.entries(it.row(), it.col()) = 1.0;
  return out;
}

void LayeredNetworkSet::add_vocabulary(Vocabulary vocab) {
  const EntityKind kind = vocab.kind();
  vocabs_.insert_or_assign(kind, std::move(vocab));
}

void LayeredNetworkSet::add_layer(NetworkLayer layer) {
  require(!has_layer(layer.name), ErrorCode::conflict, "duplicate layer '" + layer.name + "'");
  layers_.push_back(std::move(layer));
}

double max_asymmetry(const SparseMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  SparseMatrix t = m.transpose();
  SparseMatrix diff = m - t;
  double worst = 0.0;
  for (Index i = 0; i < diff.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(diff, i); it; ++it)
      worst = std::max(worst, std::abs(it.value()));
  return worst;
}

namespace {

struct PendingEdge {
  std::string source, target;
  double weight;
  int line_no;
};

struct PendingLayer {
  std::string name;
  EntityKind rows = EntityKind::drug, cols = EntityKind::drug;
  bool symmetric = false;
  std::filesystem::path path;
  std::vector<PendingEdge> edges;
};

Vocabulary load_vocabulary(EntityKind kind, const std::filesystem::path& path) {
  Vocabulary vocab(kind);
  for (const auto& row : detail::read_tsv(path)) {
    const std::string where = path.string() + ":" + std::to_string(row.line_no);
    require(row.fields.size() == 1 || row.fields.size() == 2, ErrorCode::parse,
            where + ": expected id[<TAB>name]");
    require(!vocab.contains(row.fields[0]), ErrorCode::validation,
            where + ": duplicate id '" + row.fields[0] + "'");
    vocab.add(row.fields[0], row.fields.size() == 2 ? row.fields[1] : std::string());
  }
  return vocab;
}

}  // namespace

LayeredNetworkSet load_network_layers(const std::filesystem::path& manifest_path) {
  return load_network_layers(KeyValueFile::load(manifest_path));
}

LayeredNetworkSet load_network_layers(const KeyValueFile& manifest) {
  std::map<EntityKind, Vocabulary> vocabs;
  std::map<EntityKind, bool> closed;
  for (const auto& [key, value] : manifest.with_prefix("vocab.")) {
    const EntityKind kind = parse_entity_kind(key.substr(6), true);
    vocabs.insert_or_assign(kind, load_vocabulary(kind, manifest.resolve_path(value)));
    closed[kind] = true;
  }

  std::vector<PendingLayer> pending;
  for (const auto& [key, value] : manifest.with_prefix("layer.")) {
    const std::string rest = key.substr(6);
    if (rest.find('.') != std::string::npos) continue;  // attribute line
    PendingLayer layer;
    layer.name = rest;
    layer.path = manifest.resolve_path(value);
    layer.rows = parse_entity_kind(manifest.get_or(key + ".rows", "drug"), true);
    layer.cols = parse_entity_kind(manifest.get_or(key + ".cols", "drug"), true);
    layer.symmetric = manifest.get_bool(key + ".symmetric", layer.rows == layer.cols);
    require(!layer.symmetric || layer.rows == layer.cols, ErrorCode::validation,
            "layer '" + layer.name + "': symmetric layers must be square");

    std::map<std::pair<std::string, std::string>, double> seen;
    for (const auto& row : detail::read_tsv(layer.path)) {
      const std::string where = layer.path.string() + ":" + std::to_string(row.line_no);
      require(row.fields.size() == 2 || row.fields.size() == 3, ErrorCode::parse,
              where + ": expected source<TAB>target[<TAB>weight]");
      const double weight =
          row.fields.size() == 3 ? detail::parse_double(row.fields[2], where) : 1.0;
      require(std::isfinite(weight), ErrorCode::validation, where + ": non-finite weight");
      require(weight >= 0.0, ErrorCode::validation, where + ": negative weight");
      auto [it, inserted] = seen.emplace(std::make_pair(row.fields[0], row.fields[1]), weight);
      if (!inserted) {
        require(it->second == weight, ErrorCode::conflict,
                where + ": duplicate edge " + row.fields[0] + " -> " + row.fields[1] +
                    " with conflicting weight");
        continue;
      }
      layer.edges.push_back({row.fields[0], row.fields[1], weight, row.line_no});
    }
    pending.push_back(std::move(layer));
  }

  // Vocabulary union in first-appearance order across layers.
  for (const auto& layer : pending) {
    for (EntityKind k : {layer.rows, layer.cols}) vocabs.try_emplace(k, k);
    for (const auto& e : layer.edges) {
      for (auto [kind, id] : {std::pair{layer.rows, &e.source}, std::pair{layer.cols, &e.target}}) {
        Vocabulary& vocab = vocabs.at(kind);
        if (closed[kind]) {
          require(vocab.contains(*id), ErrorCode::validation,
                  layer.path.string() + ":" + std::to_string(e.line_no) + ": dangling " +
                      std::string(to_string(kind)) + " id '" + *id + "'");
        } else {
          vocab.add(*id);
        }
      }
    }
  }

  LayeredNetworkSet set;
  for (auto& [kind, vocab] : vocabs) set.add_vocabulary(vocab);
  for (auto& layer : pending) {
    const Vocabulary& rv = vocabs.at(layer.rows);
    const Vocabulary& cv = vocabs.at(layer.cols);
    std::map<std::pair<Index, Index>, double> cells;
    for (const auto& e : layer.edges) {
      const Index i = static_cast<Index>(rv.index_of(e.source));
      const Index j = static_cast<Index>(cv.index_of(e.target));
      double& w = cells[{i, j}];
      w = std::max(w, e.weight);
      if (layer.symmetric) {
        double& wt = cells[{j, i}];
        wt = std::max(wt, e.weight);
      }
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(cells.size());
    for (const auto& [ij, w] : cells)
      if (w != 0.0) triplets.emplace_back(ij.first, ij.second, w);
    NetworkLayer built;
    built.name = layer.name;
    built.row_kind = layer.rows;
    built.col_kind = layer.cols;
    built.symmetric = layer.symmetric;
    built.source = layer.path;
    built.adjacency.resize(static_cast<Index>(rv.size()), static_cast<Index>(cv.size()));
    built.adjacency.setFromTriplets(triplets.begin(), triplets.end());
    built.adjacency.makeCompressed();
    set.add_layer(std::move(built));
  }
  return set;
}

std::filesystem::path write_network_layers(const LayeredNetworkSet& set,
                                           const std::filesystem::path& dir) {
  std::ostringstream manifest;
  manifest << "# network layers\n";
  for (const auto& [kind, vocab] : set.vocabs()) {
    const std::string file = "vocab_" + std::string(to_string(kind)) + ".tsv";
    std::ostringstream out;
    for (std::size_t i = 0; i < vocab.size(); ++i) out << vocab.id(i) << '\t' << vocab.name(i) << '\n';
    detail::write_file(dir / file, out.str());
    manifest << "vocab." << to_string(kind) << " = " << file << '\n';
  }
  for (const auto& layer : set.layers()) {
    const std::string file = "layer_" + layer.name + ".tsv";
    const Vocabulary& rv = set.vocab(layer.row_kind);
    const Vocabulary& cv = set.vocab(layer.col_kind);
    std::ostringstream out;
    for (Index i = 0; i < layer.adjacency.outerSize(); ++i)
      for (SparseMatrix::InnerIterator it(layer.adjacency, i); it; ++it) {
        if (layer.symmetric && it.col() < it.row()) continue;
        out << rv.id(static_cast<std::size_t>(it.row())) << '\t'
            << cv.id(static_cast<std::size_t>(it.col())) << '\t' << detail::format_double(it.value())
            << '\n';
      }
    detail::write_file(dir / file, out.str());
    manifest << "layer." << layer.name << " = " << file << '\n'
             << "layer." << layer.name << ".rows = " << to_string(layer.row_kind) << '\n'
             << "layer." << layer.name << ".cols = " << to_string(layer.col_kind) << '\n'
             << "layer." << layer.name << ".symmetric = " << (layer.symmetric ? "true" : "false")
             << '\n';
  }
  const auto path = dir / "manifest.txt";
  detail::write_file(path, manifest.str());
  return path;
}

}  // namespace repositioner::data
