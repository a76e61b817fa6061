#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"
#include "repositioner/predict/ranking.hpp"

#include <cstdint>
#include <vector>

namespace repositioner::predict {

struct CvaeConfig {
  Index latent = 32;
  Index hidden = 64;
  double beta_kl = 1.0;
  bool anneal = true;        // beta ramps 0 -> beta_kl over the first half of training
  bool use_features = true;  // false trains the association pathway only
  int noise_samples = 4;     // reparameterization draws, fixed per run
  int epochs = 500;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

// Collective VAE: X (drug features) and Y (drug-disease associations) each have
// an input and an output adapter around one shared encoder/decoder trunk.
struct CvaeModel {
  num::ParamSet params;
  Index latent = 0;
  bool has_features = false;
  Matrix association;  // training Y

  // sigmoid(decoded logits) from the mean latent of each row of y.
  Matrix reconstruct_associations(const Matrix& y) const;
  Matrix reconstruct_features(const Matrix& x) const;
  Matrix scores() const { return reconstruct_associations(association); }
};

struct CvaeResult {
  CvaeModel model;
  std::vector<double> history;  // total bound after each epoch at that epoch's beta
  int anneal_epochs = 0;        // history is non-increasing from this epoch on
};

enum class CvaePathway { features, associations };

CvaeModel make_cvae(Index feature_dim, const Matrix& y, const CvaeConfig& config);

// Reconstruction (squared for features, logistic for associations) averaged
// over the noise draws, plus beta * KL(q(z|row) || N(0, I)).
num::Var cvae_pathway_loss(const CvaeModel& model, const num::BoundParams& bound, num::Tape& tape,
                           CvaePathway pathway, const Matrix& input, const std::vector<Matrix>& noise, double beta);

// 0.5 * sum(mu^2 + exp(logvar) - 1 - logvar)
num::Var gaussian_kl(const num::Var& mu, const num::Var& logvar);
double gaussian_kl(const Matrix& mu, const Matrix& logvar);

CvaeResult train_cvae(const Matrix& x, const Matrix& y, const CvaeConfig& config);

// Drugs ranked by reconstructed association with disease column `disease`,
// excluding drugs already associated with it.
std::vector<RankedEntry> cvae_recommend(const CvaeModel& model, const std::vector<data::EntityRef>& drugs,
                                        Index disease, std::size_t top_n);

}  // namespace repositioner::predict
