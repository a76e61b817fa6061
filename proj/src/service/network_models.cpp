#include "model_support.hpp"

#include "repositioner/netembed/autoencoder.hpp"
#include "repositioner/netembed/ppmi.hpp"
#include "repositioner/netembed/proximity.hpp"
#include "repositioner/netembed/snf.hpp"
#include "repositioner/predict/classifier.hpp"
#include "repositioner/predict/cvae.hpp"
#include "repositioner/predict/hetgnn.hpp"
#include "repositioner/predict/pu.hpp"

#include <algorithm>

namespace repositioner::service::detail {

using data::EntityKind;

namespace {

std::vector<bool> known_in_column(const Matrix& association, std::size_t column) {
  std::vector<bool> out(static_cast<std::size_t>(association.rows()));
  for (Index i = 0; i < association.rows(); ++i)
    out[static_cast<std::size_t>(i)] = association(i, static_cast<Index>(column)) != 0.0;
  return out;
}

predict::RankedList ranked(const data::EntityRef& query, ModelKind kind, std::vector<predict::RankedEntry> entries) {
  return {query, std::string(to_string(kind)), std::move(entries)};
}

Matrix association(const data::Dataset& ds, EntityKind cols) {
  return ds.networks.association(EntityKind::drug, cols).entries;
}

std::vector<Matrix> ppmi_inputs(const std::vector<Matrix>& layers, const netembed::SurfOptions& surf) {
  std::vector<Matrix> out;
  for (const auto& a : layers) out.push_back(netembed::random_surf_ppmi(a, surf).values);
  return out;
}

netembed::SurfOptions surf_options(Section& s) {
  netembed::SurfOptions surf;
  surf.alpha = s.get_double("surf_alpha", surf.alpha);
  surf.steps = static_cast<int>(s.get_int("surf_steps", surf.steps));
  return surf;
}

// ---- DeepDR: PPMI of every drug network, multimodal autoencoder, cVAE ----

class DeepDrModel final : public TrainedModel {
 public:
  DeepDrModel(ModelBundle bundle, predict::CvaeModel cvae, std::vector<data::EntityRef> drugs,
              data::Vocabulary diseases)
      : bundle_(std::move(bundle)), cvae_(std::move(cvae)), drugs_(std::move(drugs)), diseases_(std::move(diseases)) {}

  ModelKind kind() const override { return ModelKind::deepdr; }
  predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const override {
    const auto col = static_cast<Index>(column_of(diseases_, query));
    return ranked(query, kind(), predict::cvae_recommend(cvae_, drugs_, col, top_n));
  }
  bool covers(std::string_view id) const override { return diseases_.contains(id); }
  ModelBundle bundle() const override { return bundle_; }

 private:
  ModelBundle bundle_;
  predict::CvaeModel cvae_;
  std::vector<data::EntityRef> drugs_;
  data::Vocabulary diseases_;
};

}  // namespace

std::unique_ptr<TrainedModel> train_deepdr(const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const Matrix y = association(ds, EntityKind::disease);
  std::vector<Matrix> layers = square_matrices(ds.networks, EntityKind::drug);
  if (s.get_bool("include_indications", false)) layers.push_back((y * y.transpose()).cwiseMin(1.0));
  require(!layers.empty(), ErrorCode::validation, "deepdr needs at least one drug-drug network");
  const Index n = y.rows();

  const netembed::SurfOptions surf = surf_options(s);
  netembed::MdaConfig mda;
  mda.bottleneck = s.get_int("mda_dim", std::min<Index>(32, n));
  mda.epochs = static_cast<int>(s.get_int("mda_epochs", 200));
  mda.learning_rate = s.get_double("mda_lr", mda.learning_rate);
  mda.seed = seed;
  const Matrix x = netembed::train_mda(ppmi_inputs(layers, surf), mda).features;

  predict::CvaeConfig cv;
  cv.latent = s.get_int("latent", std::max<Index>(1, std::min<Index>(16, std::min(x.cols(), y.cols()) - 1)));
  cv.hidden = s.get_int("hidden", 64);
  cv.beta_kl = s.get_double("beta_kl", cv.beta_kl);
  cv.epochs = static_cast<int>(s.get_int("epochs", 300));
  cv.learning_rate = s.get_double("lr", cv.learning_rate);
  cv.seed = seed;
  predict::CvaeModel model = predict::train_cvae(x, y, cv).model;

  ModelBundle b = start_bundle(ModelKind::deepdr, ds, s);
  put_params(b, "cvae/", model.params);
  b.put("latent", Matrix::Constant(1, 1, static_cast<double>(model.latent)));
  b.put("has_features", Matrix::Constant(1, 1, model.has_features ? 1.0 : 0.0));
  b.put("association", model.association);
  return restore_deepdr(b, ds);
}

std::unique_ptr<TrainedModel> restore_deepdr(const ModelBundle& b, const data::Dataset& ds) {
  predict::CvaeModel m;
  m.params = get_params(b, "cvae/");
  m.latent = static_cast<Index>(b.scalar("latent"));
  m.has_features = b.scalar("has_features") != 0.0;
  m.association = b.tensor("association");
  return std::make_unique<DeepDrModel>(b, std::move(m), refs(ds.networks.vocab(EntityKind::drug)),
                                       ds.networks.vocab(EntityKind::disease));
}

// ---- HeTDR: SNF-fused drug features, heterogeneous GNN with skip-gram ----

namespace {

class EmbeddingDotModel final : public TrainedModel {
 public:
  EmbeddingDotModel(ModelKind kind, ModelBundle bundle, std::vector<data::EntityRef> drugs, data::Vocabulary queries,
                    Matrix drug_emb, Matrix query_emb, Matrix known)
      : kind_(kind),
        bundle_(std::move(bundle)),
        drugs_(std::move(drugs)),
        queries_(std::move(queries)),
        drug_emb_(std::move(drug_emb)),
        query_emb_(std::move(query_emb)),
        known_(std::move(known)) {}

  ModelKind kind() const override { return kind_; }
  predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const override {
    const std::size_t col = column_of(queries_, query);
    const Vector scores = drug_emb_ * query_emb_.row(static_cast<Index>(col)).transpose();
    const auto known = known_in_column(known_, col);
    return ranked(query, kind_, predict::rank_entities(drugs_, scores, top_n, &known));
  }
  bool covers(std::string_view id) const override { return queries_.contains(id); }
  ModelBundle bundle() const override { return bundle_; }

 private:
  ModelKind kind_;
  ModelBundle bundle_;
  std::vector<data::EntityRef> drugs_;
  data::Vocabulary queries_;
  Matrix drug_emb_;
  Matrix query_emb_;
  Matrix known_;
};

// Symmetric 0/1 adjacency keeping each row's k most similar other nodes.
Matrix knn_graph(const Matrix& similarity, int k) {
  const Index n = similarity.rows();
  Matrix out = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    std::vector<Index> order;
    for (Index j = 0; j < n; ++j)
      if (j != i && similarity(i, j) > 0.0) order.push_back(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return similarity(i, a) > similarity(i, b); });
    for (std::size_t r = 0; r < order.size() && r < static_cast<std::size_t>(k); ++r) {
      out(i, order[r]) = 1.0;
      out(order[r], i) = 1.0;
    }
  }
  return out;
}

}  // namespace

std::unique_ptr<TrainedModel> train_hetdr(const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const Matrix y = association(ds, EntityKind::disease);
  const std::vector<Matrix> layers = square_matrices(ds.networks, EntityKind::drug);
  require(!layers.empty(), ErrorCode::validation, "hetdr needs at least one drug similarity network");
  const Index nd = y.rows(), ns = y.cols();

  netembed::SnfConfig snf;
  snf.neighbors = static_cast<int>(s.get_int("snf_neighbors", std::min<Index>(20, nd - 1)));
  snf.iterations = static_cast<int>(s.get_int("snf_iterations", snf.iterations));
  const Matrix fused = netembed::snf_fuse(layers, snf);

  Matrix disease_features = y.transpose();
  if (const auto* table = ds.find_features(EntityKind::disease))
    disease_features = table->aligned(ds.networks.vocab(EntityKind::disease));

  predict::HetGraph g;
  g.types = {"drug", "disease"};
  g.counts = {nd, ns};
  g.edge_names = {"drug-disease", "drug-drug"};
  Matrix dd = Matrix::Zero(nd + ns, nd + ns);
  dd.block(0, nd, nd, ns) = y;
  dd.block(nd, 0, ns, nd) = y.transpose();
  Matrix ss = Matrix::Zero(nd + ns, nd + ns);
  ss.block(0, 0, nd, nd) = knn_graph(fused, static_cast<int>(s.get_int("drug_neighbors", 5)));
  g.edges = {dd, ss};

  predict::HetGnnConfig het;
  het.neighbor_dim = s.get_int("neighbor_dim", het.neighbor_dim);
  het.output_dim = s.get_int("dim", het.output_dim);
  het.attention_dim = s.get_int("attention_dim", het.attention_dim);
  het.layers = static_cast<int>(s.get_int("layers", het.layers));
  predict::SkipGramConfig sg;
  sg.metapaths = {{"drug", "disease", "drug"}, {"disease", "drug", "disease"}};
  sg.walk.walks_per_node = static_cast<int>(s.get_int("walks", sg.walk.walks_per_node));
  sg.walk.walk_length = static_cast<int>(s.get_int("walk_length", sg.walk.walk_length));
  sg.walk.window = static_cast<int>(s.get_int("window", sg.walk.window));
  sg.walk.negatives = static_cast<int>(s.get_int("negatives", sg.walk.negatives));
  sg.epochs = static_cast<int>(s.get_int("epochs", sg.epochs));
  sg.batch_size = static_cast<std::size_t>(s.get_int("batch_size", static_cast<long long>(sg.batch_size)));
  sg.learning_rate = s.get_double("lr", sg.learning_rate);
  sg.seed = seed;
  const predict::SkipGramResult r = predict::train_hetgnn(g, {fused, disease_features}, het, sg);

  // Skip-gram link score, symmetrized: v_drug . c_disease + v_disease . c_drug.
  Matrix drug_side(nd, 2 * het.output_dim), disease_side(ns, 2 * het.output_dim);
  drug_side << r.embeddings.topRows(nd), r.context.topRows(nd);
  disease_side << r.context.bottomRows(ns), r.embeddings.bottomRows(ns);
  ModelBundle b = start_bundle(ModelKind::hetdr, ds, s);
  b.put("drug_embeddings", drug_side);
  b.put("disease_embeddings", disease_side);
  b.put("association", y);
  return restore_hetdr(b, ds);
}

std::unique_ptr<TrainedModel> restore_hetdr(const ModelBundle& b, const data::Dataset& ds) {
  return std::make_unique<EmbeddingDotModel>(ModelKind::hetdr, b, refs(ds.networks.vocab(EntityKind::drug)),
                                             ds.networks.vocab(EntityKind::disease), b.tensor("drug_embeddings"),
                                             b.tensor("disease_embeddings"), b.tensor("association"));
}

// ---- DeepDTnet: per-network SDAE features, PU matrix completion ----

namespace {

class ScoreMatrixModel final : public TrainedModel {
 public:
  ScoreMatrixModel(ModelKind kind, ModelBundle bundle, std::vector<data::EntityRef> drugs, data::Vocabulary queries,
                   Matrix scores, Matrix known)
      : kind_(kind),
        bundle_(std::move(bundle)),
        drugs_(std::move(drugs)),
        queries_(std::move(queries)),
        scores_(std::move(scores)),
        known_(std::move(known)) {}

  ModelKind kind() const override { return kind_; }
  predict::RankedList rank(const data::EntityRef& query, std::size_t top_n) const override {
    const std::size_t col = column_of(queries_, query);
    const auto known = known_in_column(known_, col);
    return ranked(query, kind_,
                  predict::rank_entities(drugs_, scores_.col(static_cast<Index>(col)), top_n, &known));
  }
  bool covers(std::string_view id) const override { return queries_.contains(id); }
  ModelBundle bundle() const override { return bundle_; }

 private:
  ModelKind kind_;
  ModelBundle bundle_;
  std::vector<data::EntityRef> drugs_;
  data::Vocabulary queries_;
  Matrix scores_;
  Matrix known_;
};

Matrix sdae_features(const std::vector<Matrix>& layers, Index n, Section& s, const std::string& tag,
                     std::uint64_t seed) {
  if (layers.empty()) return Matrix::Identity(n, n);
  netembed::SdaeConfig cfg;
  const Index hidden = s.get_int(tag + "_hidden", std::min<Index>(64, n));
  const Index dim = s.get_int(tag + "_dim", std::min<Index>(16, hidden));
  cfg.dims = {n, hidden, dim, hidden, n};
  cfg.corruption = s.get_double("corruption", cfg.corruption);
  cfg.l2 = s.get_double("sdae_l2", cfg.l2);
  cfg.epochs = static_cast<int>(s.get_int("sdae_epochs", 200));
  cfg.learning_rate = s.get_double("sdae_lr", cfg.learning_rate);
  const netembed::SurfOptions surf = surf_options(s);
  const std::vector<Matrix> inputs = ppmi_inputs(layers, surf);
  Matrix out(n, dim * static_cast<Index>(inputs.size()));
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    cfg.seed = mix_seed(seed, tag + std::to_string(i));
    out.middleCols(static_cast<Index>(i) * dim, dim) = netembed::train_sdae(inputs[i], cfg).features;
  }
  return out;
}

}  // namespace

std::unique_ptr<TrainedModel> train_deepdtnet(const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const Matrix m = association(ds, EntityKind::target);
  const Matrix xd = sdae_features(square_matrices(ds.networks, EntityKind::drug), m.rows(), s, "drug", seed);
  const Matrix xt = sdae_features(square_matrices(ds.networks, EntityKind::target), m.cols(), s, "target", seed);

  predict::PuConfig pu;
  pu.rank = s.get_int("rank", std::max<Index>(1, std::min<Index>(10, std::min(m.rows(), m.cols()) / 2)));
  pu.epsilon = s.get_double("epsilon", pu.epsilon);
  pu.lambda = s.get_double("lambda", pu.lambda);
  pu.epochs = static_cast<int>(s.get_int("epochs", pu.epochs));
  pu.learning_rate = s.get_double("lr", pu.learning_rate);
  pu.seed = seed;
  const predict::PuModel model = predict::pu_complete(m, xd, xt, pu).model;

  ModelBundle b = start_bundle(ModelKind::deepdtnet, ds, s);
  b.put("pu.p", model.p);
  b.put("pu.o", model.o);
  b.put("drug_features", model.drug_features);
  b.put("target_features", model.target_features);
  b.put("association", m);
  return restore_deepdtnet(b, ds);
}

std::unique_ptr<TrainedModel> restore_deepdtnet(const ModelBundle& b, const data::Dataset& ds) {
  predict::PuModel m;
  m.p = b.tensor("pu.p");
  m.o = b.tensor("pu.o");
  m.drug_features = b.tensor("drug_features");
  m.target_features = b.tensor("target_features");
  return std::make_unique<ScoreMatrixModel>(ModelKind::deepdtnet, b, refs(ds.networks.vocab(EntityKind::drug)),
                                            ds.networks.vocab(EntityKind::target), m.scores(),
                                            b.tensor("association"));
}

// ---- AOPEDF: arbitrary-order proximity embedding, pair classifier ----

namespace {

Matrix pair_features(const Matrix& drugs, const Eigen::RowVectorXd& target) {
  const Index d = drugs.cols();
  Matrix out(drugs.rows(), 3 * d);
  out.leftCols(d) = drugs;
  out.middleCols(d, d) = target.replicate(drugs.rows(), 1);
  out.rightCols(d) = drugs.array().rowwise() * target.array();
  return out;
}

Matrix aopedf_scores(const Matrix& drug_emb, const Matrix& target_emb, const predict::LogisticClassifier& clf) {
  Matrix out(drug_emb.rows(), target_emb.rows());
  for (Index t = 0; t < target_emb.rows(); ++t) out.col(t) = clf.predict_proba(pair_features(drug_emb, target_emb.row(t)));
  return out;
}

}  // namespace

std::unique_ptr<TrainedModel> train_aopedf(const data::Dataset& ds, Section& s, std::uint64_t seed) {
  const Matrix m = association(ds, EntityKind::target);
  const Index nd = m.rows(), nt = m.cols();
  Matrix a = Matrix::Zero(nd + nt, nd + nt);
  for (const auto& l : square_matrices(ds.networks, EntityKind::drug)) a.topLeftCorner(nd, nd) += l;
  for (const auto& l : square_matrices(ds.networks, EntityKind::target)) a.bottomRightCorner(nt, nt) += l;
  a.topRightCorner(nd, nt) = m;
  a.bottomLeftCorner(nt, nd) = m.transpose();
  if (a.maxCoeff() > 0.0) a /= a.maxCoeff();

  netembed::ProximityConfig prox;
  prox.weights = s.get_doubles("weights", {1.0, 0.5, 0.25});
  prox.dim = s.get_int("dim", std::min<Index>(16, nd + nt));
  const Matrix u = netembed::arbitrary_proximity_embed(a, prox).content;
  const Matrix drug_emb = u.topRows(nd), target_emb = u.bottomRows(nt);

  std::vector<std::pair<Index, Index>> positives, negatives;
  for (Index i = 0; i < nd; ++i)
    for (Index j = 0; j < nt; ++j) (m(i, j) != 0.0 ? positives : negatives).emplace_back(i, j);
  require(!positives.empty() && !negatives.empty(), ErrorCode::validation,
          "aopedf needs both known and unknown drug-target pairs");
  Rng rng = make_rng(seed, "aopedf.negatives");
  std::shuffle(negatives.begin(), negatives.end(), rng);
  const auto ratio = static_cast<std::size_t>(s.get_int("negative_ratio", 1));
  negatives.resize(std::min(negatives.size(), positives.size() * ratio));

  Matrix features(static_cast<Index>(positives.size() + negatives.size()), 3 * u.cols());
  std::vector<int> labels;
  Index row = 0;
  for (const auto* group : {&positives, &negatives})
    for (const auto& [i, j] : *group) {
      features.row(row++) = pair_features(drug_emb.row(i), target_emb.row(j));
      labels.push_back(group == &positives ? 1 : 0);
    }
  predict::LogisticConfig lc;
  lc.lambda = s.get_double("lambda", lc.lambda);
  lc.epochs = static_cast<int>(s.get_int("epochs", lc.epochs));
  lc.learning_rate = s.get_double("lr", lc.learning_rate);
  lc.seed = seed;
  const predict::LogisticClassifier clf = predict::train_classifier(features, labels, lc).model;

  ModelBundle b = start_bundle(ModelKind::aopedf, ds, s);
  b.put("drug_embeddings", drug_emb);
  b.put("target_embeddings", target_emb);
  b.put("classifier.weights", Matrix(clf.weights()));
  b.put("classifier.bias", Matrix::Constant(1, 1, clf.bias()));
  b.put("association", m);
  return restore_aopedf(b, ds);
}

std::unique_ptr<TrainedModel> restore_aopedf(const ModelBundle& b, const data::Dataset& ds) {
  const predict::LogisticClassifier clf(b.tensor("classifier.weights").col(0), b.scalar("classifier.bias"));
  return std::make_unique<ScoreMatrixModel>(
      ModelKind::aopedf, b, refs(ds.networks.vocab(EntityKind::drug)), ds.networks.vocab(EntityKind::target),
      aopedf_scores(b.tensor("drug_embeddings"), b.tensor("target_embeddings"), clf), b.tensor("association"));
}

}  // namespace repositioner::service::detail
