#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"

#include <cstdint>
#include <vector>

namespace repositioner::netembed {

struct MdaConfig {
  Index bottleneck = 64;
  std::vector<Index> hidden;  // encoder widths between n and the bottleneck
  num::Activation hidden_activation = num::Activation::sigmoid;
  num::Activation bottleneck_activation = num::Activation::sigmoid;
  int epochs = 200;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

// One encoder and one decoder per input network, joined at a shared
// bottleneck z = act(sum_i enc_i(X^i)).
struct MdaModel {
  num::ParamSet params;
  std::size_t networks = 0;
  Index n = 0;
  std::vector<Index> encoder_dims;  // n, hidden..., bottleneck
  num::Activation hidden_activation = num::Activation::sigmoid;
  num::Activation bottleneck_activation = num::Activation::sigmoid;

  Matrix encode(const std::vector<Matrix>& inputs) const;
  std::vector<Matrix> reconstruct(const std::vector<Matrix>& inputs) const;
};

struct MdaResult {
  MdaModel model;
  Matrix features;                                // n x bottleneck
  std::vector<double> history;                    // total loss, initial then per epoch
  std::vector<std::vector<double>> network_loss;  // [epoch][network]
};

MdaModel make_mda(std::size_t networks, Index n, const MdaConfig& config);
// Total loss sum_i ||X^i - Xhat^i||_F^2 on the tape; per-network terms in `parts`.
num::Var mda_loss(const MdaModel& model, const num::BoundParams& bound, num::Tape& tape,
                  const std::vector<Matrix>& inputs, std::vector<double>* parts = nullptr);
MdaResult train_mda(const std::vector<Matrix>& inputs, const MdaConfig& config);

struct SdaeConfig {
  std::vector<Index> dims;  // n, ..., bottleneck, ..., n
  double corruption = 0.2;
  int mask_pool = 8;  // corrupted copies drawn once; each epoch averages over them
  double l2 = 1e-4;
  num::Activation hidden_activation = num::Activation::sigmoid;
  int epochs = 300;
  double learning_rate = 1e-2;
  std::uint64_t seed = 0;
};

struct SdaeModel {
  num::ParamSet params;
  std::vector<num::Activation> activations;
  Index middle = 0;  // index of the layer whose output is the embedding

  Matrix reconstruct(const Matrix& x) const;
  Matrix encode(const Matrix& x) const;
};

struct SdaeResult {
  SdaeModel model;
  Matrix features;
  std::vector<double> history;  // pooled objective, initial then per epoch
};

SdaeModel make_sdae(const SdaeConfig& config);
// data_weight * ||target - xhat(input)||_F^2 + l2 * sum ||W_l||_F^2
num::Var sdae_objective(const SdaeModel& model, const num::BoundParams& bound, num::Tape& tape,
                        const Matrix& input, const Matrix& target, double l2, double data_weight = 1.0);
SdaeResult train_sdae(const Matrix& x, const SdaeConfig& config);

}  // namespace repositioner::netembed
