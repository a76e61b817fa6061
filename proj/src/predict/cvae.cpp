#include "repositioner/predict/cvae.hpp"

#include "repositioner/numerics/ffn.hpp"

#include <algorithm>
#include <cmath>

namespace repositioner::predict {

using num::Activation;
using num::Var;
namespace ad = num::ad;

namespace {

const char* in_prefix(CvaePathway p) { return p == CvaePathway::features ? "cvae.in_x" : "cvae.in_y"; }
const char* out_prefix(CvaePathway p) { return p == CvaePathway::features ? "cvae.out_x" : "cvae.out_y"; }

void add_linear(num::ParamSet& params, const std::string& prefix, Index in, Index out, Rng& rng) {
  params.add(prefix + ".W0", num::glorot(in, out, rng));
  params.add(prefix + ".b0", Matrix::Zero(1, out));
}

struct Encoded {
  Var mu;
  Var logvar;
};

Encoded encode(const num::BoundParams& bound, num::Tape& tape, CvaePathway pathway, const Matrix& input) {
  Var h = num::ffn_apply(bound, in_prefix(pathway), {Activation::sigmoid}, tape.constant(input));
  return {num::ffn_apply(bound, "cvae.mu", {Activation::identity}, h),
          num::ffn_apply(bound, "cvae.logvar", {Activation::identity}, h)};
}

Var decode(const num::BoundParams& bound, CvaePathway pathway, const Var& z) {
  Var d = num::ffn_apply(bound, "cvae.dec", {Activation::sigmoid}, z);
  return num::ffn_apply(bound, out_prefix(pathway), {Activation::identity}, d);
}

Matrix mean_reconstruction(const CvaeModel& m, CvaePathway pathway, const Matrix& input) {
  num::Tape tape;
  auto bound = num::bind(tape, m.params);
  return decode(bound, pathway, encode(bound, tape, pathway, input).mu).value();
}

}  // namespace

Var gaussian_kl(const Var& mu, const Var& logvar) {
  Var inner = ad::sub(ad::add(ad::square(mu), ad::exp(logvar)), ad::add_scalar(logvar, 1.0));
  return ad::scale(ad::sum(inner), 0.5);
}

double gaussian_kl(const Matrix& mu, const Matrix& logvar) {
  return 0.5 * (mu.array().square() + logvar.array().exp() - 1.0 - logvar.array()).sum();
}

CvaeModel make_cvae(Index feature_dim, const Matrix& y, const CvaeConfig& config) {
  require(config.latent >= 1 && config.hidden >= 1, ErrorCode::invalid_argument, "cVAE dimensions must be positive");
  require(config.noise_samples >= 1, ErrorCode::invalid_argument, "cVAE needs at least one noise sample");
  require((y.array() == 0.0 || y.array() == 1.0).all(), ErrorCode::validation, "association entries must be 0 or 1");
  const Index smallest = config.use_features ? std::min(feature_dim, y.cols()) : y.cols();
  require(config.latent < smallest, ErrorCode::invalid_argument,
          "cVAE latent dimension " + std::to_string(config.latent) + " must be below " + std::to_string(smallest));
  CvaeModel m;
  m.latent = config.latent;
  m.has_features = config.use_features;
  m.association = y;
  Rng rng = make_rng(config.seed, "cvae.init");
  if (config.use_features) add_linear(m.params, "cvae.in_x", feature_dim, config.hidden, rng);
  add_linear(m.params, "cvae.in_y", y.cols(), config.hidden, rng);
  add_linear(m.params, "cvae.mu", config.hidden, config.latent, rng);
  add_linear(m.params, "cvae.logvar", config.hidden, config.latent, rng);
  add_linear(m.params, "cvae.dec", config.latent, config.hidden, rng);
  if (config.use_features) add_linear(m.params, "cvae.out_x", config.hidden, feature_dim, rng);
  add_linear(m.params, "cvae.out_y", config.hidden, y.cols(), rng);
  return m;
}

Var cvae_pathway_loss(const CvaeModel& m, const num::BoundParams& bound, num::Tape& tape, CvaePathway pathway,
                      const Matrix& input, const std::vector<Matrix>& noise, double beta) {
  require(!noise.empty(), ErrorCode::invalid_argument, "cVAE loss needs noise draws");
  require(pathway == CvaePathway::associations || m.has_features, ErrorCode::unsupported,
          "cVAE was built without a feature pathway");
  const Encoded enc = encode(bound, tape, pathway, input);
  const Var sigma = ad::exp(ad::scale(enc.logvar, 0.5));
  Var recon;
  for (std::size_t s = 0; s < noise.size(); ++s) {
    const Var z = ad::add(enc.mu, ad::hadamard(sigma, tape.constant(noise[s])));
    const Var out = decode(bound, pathway, z);
    const Var term = pathway == CvaePathway::features ? ad::squared_error(out, input) : ad::bce_with_logits(out, input);
    recon = s == 0 ? term : ad::add(recon, term);
  }
  recon = ad::scale(recon, 1.0 / static_cast<double>(noise.size()));
  if (beta == 0.0) return recon;
  return ad::add(recon, ad::scale(gaussian_kl(enc.mu, enc.logvar), beta));
}

Matrix CvaeModel::reconstruct_associations(const Matrix& y) const {
  return mean_reconstruction(*this, CvaePathway::associations, y).unaryExpr([](double v) {
    return 1.0 / (1.0 + std::exp(-v));
  });
}

Matrix CvaeModel::reconstruct_features(const Matrix& x) const {
  require(has_features, ErrorCode::unsupported, "cVAE was trained without a feature pathway");
  return mean_reconstruction(*this, CvaePathway::features, x);
}

CvaeResult train_cvae(const Matrix& x, const Matrix& y, const CvaeConfig& config) {
  if (config.use_features)
    require(x.rows() == y.rows(), ErrorCode::dimension_mismatch,
            "cVAE feature rows (" + std::to_string(x.rows()) + ") and association rows (" +
                std::to_string(y.rows()) + ") must index the same drugs");
  CvaeResult result;
  result.model = make_cvae(config.use_features ? x.cols() : 0, y, config);
  CvaeModel& model = result.model;

  Rng rng = make_rng(config.seed, "cvae.noise");
  std::vector<Matrix> noise;
  for (int s = 0; s < config.noise_samples; ++s) noise.push_back(random_normal(y.rows(), config.latent, 1.0, rng));

  auto evaluate = [&](CvaePathway pathway, double beta, std::vector<Matrix>* grads, std::vector<bool>* touched) {
    num::Tape tape;
    auto bound = num::bind(tape, model.params);
    Var loss = cvae_pathway_loss(model, bound, tape, pathway, pathway == CvaePathway::features ? x : y, noise, beta);
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "cVAE loss is not finite");
    if (grads) {
      tape.backward(loss);
      *grads = bound.grads(tape, touched);
    }
    return loss.scalar();
  };
  auto total = [&](double beta) {
    double t = evaluate(CvaePathway::associations, beta, nullptr, nullptr);
    if (config.use_features) t += evaluate(CvaePathway::features, beta, nullptr, nullptr);
    return t;
  };

  const int half = std::max(1, config.epochs / 2);
  result.anneal_epochs = config.anneal ? half : 0;
  auto state = num::make_adam_state(model.params.values());
  num::AdamConfig adam;
  adam.lr = config.learning_rate;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const double beta =
        config.anneal ? config.beta_kl * std::min(1.0, static_cast<double>(epoch + 1) / half) : config.beta_kl;
    const CvaePathway pathway =
        config.use_features && epoch % 2 == 0 ? CvaePathway::features : CvaePathway::associations;
    const double current = total(beta);
    std::vector<Matrix> grads;
    std::vector<bool> touched;
    evaluate(pathway, beta, &grads, &touched);
    const std::vector<Matrix> saved = model.params.values();
    const num::AdamState saved_state = state;
    double value = current;
    for (int attempt = 0; attempt <= 30; ++attempt) {
      num::adam_step(model.params.values(), grads, state, adam, &touched);
      const double next = total(beta);
      if (next <= current) {
        value = next;
        break;
      }
      model.params.values() = saved;
      state = saved_state;
      adam.lr *= 0.5;
    }
    result.history.push_back(value);
    adam.lr = std::min(config.learning_rate, adam.lr * 1.25);
  }
  return result;
}

std::vector<RankedEntry> cvae_recommend(const CvaeModel& model, const std::vector<data::EntityRef>& drugs,
                                        Index disease, std::size_t top_n) {
  require(disease >= 0 && disease < model.association.cols(), ErrorCode::not_found,
          "disease column " + std::to_string(disease) + " is outside the association matrix");
  require(static_cast<Index>(drugs.size()) == model.association.rows(), ErrorCode::dimension_mismatch,
          "drug list does not match the association matrix");
  const Matrix s = model.scores();
  std::vector<bool> known(drugs.size());
  for (std::size_t i = 0; i < drugs.size(); ++i) known[i] = model.association(static_cast<Index>(i), disease) != 0.0;
  return rank_entities(drugs, s.col(disease), top_n, &known);
}

}  // namespace repositioner::predict
