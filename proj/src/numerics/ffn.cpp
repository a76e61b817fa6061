#include "repositioner/numerics/ffn.hpp"

#include <cmath>

namespace repositioner::num {

Matrix glorot(Index in, Index out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
  return random_uniform(in, out, -limit, limit, rng);
}

void FeedForwardNet::validate() const {
  require(!layers.empty(), ErrorCode::invalid_argument, "network has no layers");
  require(l2 >= 0.0, ErrorCode::invalid_argument, "l2 coefficient must be non-negative");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    require(layers[l].bias.size() == layers[l].weight.cols(), ErrorCode::dimension_mismatch,
            "layer " + std::to_string(l) + ": bias size does not match weight columns");
    if (l > 0)
      require(layers[l].weight.rows() == layers[l - 1].weight.cols(), ErrorCode::dimension_mismatch,
              "layer " + std::to_string(l) + ": input dimension does not chain");
  }
}

Matrix FeedForwardNet::forward(const Matrix& input) const {
  Tape tape;
  ParamSet params;
  add_to_params(*this, "net", params);
  BoundParams bound = bind(tape, params);
  std::vector<Activation> acts;
  for (const auto& l : layers) acts.push_back(l.activation);
  return ffn_apply(bound, "net", acts, tape.constant(input)).value();
}

FeedForwardNet make_ffn(const std::vector<Index>& dims, Activation hidden, Activation output, Rng& rng) {
  require(dims.size() >= 2, ErrorCode::invalid_argument, "make_ffn needs at least input and output dims");
  FeedForwardNet net;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l)
    net.layers.push_back({glorot(dims[l], dims[l + 1], rng), Eigen::RowVectorXd::Zero(dims[l + 1]),
                          l + 2 == dims.size() ? output : hidden});
  return net;
}

void add_to_params(const FeedForwardNet& net, const std::string& prefix, ParamSet& params) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    params.add(prefix + ".W" + std::to_string(l), net.layers[l].weight);
    params.add(prefix + ".b" + std::to_string(l), Matrix(net.layers[l].bias));
  }
}

Var ffn_apply(const BoundParams& bound, const std::string& prefix, const std::vector<Activation>& activations,
              const Var& input, bool check_finite) {
  Var h = input;
  for (std::size_t l = 0; l < activations.size(); ++l) {
    const Var& w = bound[prefix + ".W" + std::to_string(l)];
    const Var& b = bound[prefix + ".b" + std::to_string(l)];
    require(h.cols() == w.rows(), ErrorCode::dimension_mismatch,
            prefix + " layer " + std::to_string(l) + ": input has " + std::to_string(h.cols()) +
                " columns, weight expects " + std::to_string(w.rows()));
    h = ad::activate(ad::add_row(ad::matmul(h, w), b), activations[l]);
    if (check_finite)
      require(h.value().allFinite(), ErrorCode::non_finite,
              prefix + ": non-finite activation at layer " + std::to_string(l));
  }
  return h;
}

FfnGradients ffn_forward_backward(const FeedForwardNet& net, const Matrix& input, const LossSpec& loss) {
  net.validate();
  require(input.cols() == net.input_dim(), ErrorCode::dimension_mismatch,
          "input has " + std::to_string(input.cols()) + " columns, network expects " +
              std::to_string(net.input_dim()));
  require(loss.target.rows() == input.rows() && loss.target.cols() == net.output_dim(),
          ErrorCode::dimension_mismatch, "loss target shape does not match network output");

  Tape tape;
  ParamSet params;
  add_to_params(net, "net", params);
  BoundParams bound = bind(tape, params);
  std::vector<Activation> acts;
  for (const auto& l : net.layers) acts.push_back(l.activation);
  Var out = ffn_apply(bound, "net", acts, tape.constant(input), true);

  Var total = loss.kind == LossKind::squared ? ad::squared_error(out, loss.target)
                                             : ad::bce_with_logits(out, loss.target);
  if (net.l2 > 0.0)
    for (std::size_t l = 0; l < net.layers.size(); ++l)
      total = ad::add(total, ad::scale(ad::squared_norm(bound["net.W" + std::to_string(l)]), net.l2));
  require(std::isfinite(total.scalar()), ErrorCode::non_finite, "loss is not finite");
  tape.backward(total);

  FfnGradients out_grads;
  out_grads.loss = total.scalar();
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    out_grads.weight_grads.push_back(tape.grad(bound["net.W" + std::to_string(l)]));
    out_grads.bias_grads.push_back(tape.grad(bound["net.b" + std::to_string(l)]).row(0));
  }
  return out_grads;
}

}  // namespace repositioner::num
