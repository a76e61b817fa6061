#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/params.hpp"

#include <string>
#include <vector>

namespace repositioner::num {

struct DenseLayer {
  Matrix weight;             // in x out
  Eigen::RowVectorXd bias;   // 1 x out
  Activation activation = Activation::identity;
};

struct FeedForwardNet {
  std::vector<DenseLayer> layers;
  double l2 = 0.0;  // coefficient of sum_l ||W_l||_F^2

  Index input_dim() const { return layers.empty() ? 0 : layers.front().weight.rows(); }
  Index output_dim() const { return layers.empty() ? 0 : layers.back().weight.cols(); }
  void validate() const;
  Matrix forward(const Matrix& input) const;
};

// Glorot-uniform weights, zero biases. dims = {in, h1, ..., out}; every layer
// uses `hidden` except the last, which uses `output`.
FeedForwardNet make_ffn(const std::vector<Index>& dims, Activation hidden, Activation output, Rng& rng);

enum class LossKind { squared, logistic };

struct LossSpec {
  LossKind kind = LossKind::squared;
  Matrix target;
};

struct FfnGradients {
  double loss = 0.0;
  std::vector<Matrix> weight_grads;
  std::vector<Eigen::RowVectorXd> bias_grads;
};

// Loss is sum of squared errors (or summed logistic loss on logits) plus
// l2 * sum ||W_l||_F^2. Non-finite activations raise with the layer index.
FfnGradients ffn_forward_backward(const FeedForwardNet& net, const Matrix& input, const LossSpec& loss);

// Registers layer parameters as `<prefix>.W<l>` / `<prefix>.b<l>`.
void add_to_params(const FeedForwardNet& net, const std::string& prefix, ParamSet& params);

// Forward pass on the tape reading `<prefix>.W<l>` / `<prefix>.b<l>`.
Var ffn_apply(const BoundParams& bound, const std::string& prefix, const std::vector<Activation>& activations,
              const Var& input, bool check_finite = false);

Matrix glorot(Index in, Index out, Rng& rng);

}  // namespace repositioner::num
