#include "repositioner/netembed/autoencoder.hpp"

#include "repositioner/numerics/ffn.hpp"

#include <algorithm>

namespace repositioner::netembed {

using num::Activation;
using num::Var;
namespace ad = num::ad;

namespace {

std::string enc_prefix(std::size_t i) { return "mda.enc" + std::to_string(i); }
std::string dec_prefix(std::size_t i) { return "mda.dec" + std::to_string(i); }

std::vector<Activation> encoder_activations(const MdaModel& m) {
  std::vector<Activation> acts(m.encoder_dims.size() - 1, m.hidden_activation);
  acts.back() = Activation::identity;
  return acts;
}

std::vector<Activation> decoder_activations(const MdaModel& m) {
  std::vector<Activation> acts(m.encoder_dims.size() - 1, m.hidden_activation);
  acts.back() = Activation::identity;
  return acts;
}

Var mda_bottleneck(const MdaModel& m, const num::BoundParams& bound, num::Tape& tape,
                   const std::vector<Matrix>& inputs) {
  require(inputs.size() == m.networks, ErrorCode::dimension_mismatch,
          "MDA expects " + std::to_string(m.networks) + " input networks, got " + std::to_string(inputs.size()));
  Var sum;
  for (std::size_t i = 0; i < m.networks; ++i) {
    require(inputs[i].rows() == m.n && inputs[i].cols() == m.n, ErrorCode::dimension_mismatch,
            "MDA inputs must all be " + std::to_string(m.n) + "x" + std::to_string(m.n));
    Var e = num::ffn_apply(bound, enc_prefix(i), encoder_activations(m), tape.constant(inputs[i]));
    sum = i == 0 ? e : ad::add(sum, e);
  }
  return ad::activate(sum, m.bottleneck_activation);
}

}  // namespace

MdaModel make_mda(std::size_t networks, Index n, const MdaConfig& config) {
  require(networks >= 1, ErrorCode::invalid_argument, "MDA needs at least one network");
  require(config.bottleneck >= 1 && config.bottleneck <= n, ErrorCode::invalid_argument,
          "MDA bottleneck must lie in [1, n]");
  MdaModel m;
  m.networks = networks;
  m.n = n;
  m.encoder_dims.push_back(n);
  for (Index h : config.hidden) m.encoder_dims.push_back(h);
  m.encoder_dims.push_back(config.bottleneck);
  m.hidden_activation = config.hidden_activation;
  m.bottleneck_activation = config.bottleneck_activation;
  std::vector<Index> dec_dims(m.encoder_dims.rbegin(), m.encoder_dims.rend());
  for (std::size_t i = 0; i < networks; ++i) {
    // Every network starts from the same draws.
    Rng rng = make_rng(config.seed, "mda.network");
    num::add_to_params(num::make_ffn(m.encoder_dims, m.hidden_activation, Activation::identity, rng),
                       enc_prefix(i), m.params);
    num::add_to_params(num::make_ffn(dec_dims, m.hidden_activation, Activation::identity, rng),
                       dec_prefix(i), m.params);
  }
  return m;
}

Var mda_loss(const MdaModel& m, const num::BoundParams& bound, num::Tape& tape, const std::vector<Matrix>& inputs,
             std::vector<double>* parts) {
  const Var z = mda_bottleneck(m, bound, tape, inputs);
  Var total;
  if (parts) parts->clear();
  for (std::size_t i = 0; i < m.networks; ++i) {
    Var rec = num::ffn_apply(bound, dec_prefix(i), decoder_activations(m), z);
    Var loss = ad::squared_error(rec, inputs[i]);
    if (parts) parts->push_back(loss.scalar());
    total = i == 0 ? loss : ad::add(total, loss);
  }
  return total;
}

Matrix MdaModel::encode(const std::vector<Matrix>& inputs) const {
  num::Tape tape;
  auto bound = num::bind(tape, params);
  return mda_bottleneck(*this, bound, tape, inputs).value();
}

std::vector<Matrix> MdaModel::reconstruct(const std::vector<Matrix>& inputs) const {
  num::Tape tape;
  auto bound = num::bind(tape, params);
  const Var z = mda_bottleneck(*this, bound, tape, inputs);
  std::vector<Matrix> out;
  for (std::size_t i = 0; i < networks; ++i)
    out.push_back(num::ffn_apply(bound, dec_prefix(i), decoder_activations(*this), z).value());
  return out;
}

MdaResult train_mda(const std::vector<Matrix>& inputs, const MdaConfig& config) {
  require(!inputs.empty(), ErrorCode::invalid_argument, "MDA needs at least one input network");
  MdaResult result;
  result.model = make_mda(inputs.size(), inputs.front().rows(), config);
  std::vector<double> parts;
  const num::Objective objective = [&](const num::ParamSet& p, std::vector<Matrix>* grads) {
    num::Tape tape;
    auto bound = num::bind(tape, p);
    Var loss = mda_loss(result.model, bound, tape, inputs, &parts);
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "MDA loss is not finite");
    if (grads) {
      tape.backward(loss);
      *grads = bound.grads(tape);
    }
    return loss.scalar();
  };
  num::DescentOptions opts;
  opts.adam.lr = config.learning_rate;
  opts.epochs = config.epochs;
  opts.on_accept = [&](const num::ParamSet&, double) { result.network_loss.push_back(parts); };
  objective(result.model.params, nullptr);
  result.network_loss.push_back(parts);
  result.history = num::minimize_monotone(result.model.params, objective, opts).history;
  result.features = result.model.encode(inputs);
  return result;
}

SdaeModel make_sdae(const SdaeConfig& config) {
  const auto& dims = config.dims;
  require(dims.size() >= 3, ErrorCode::invalid_argument, "SDAE needs at least one hidden layer");
  require(dims.front() == dims.back(), ErrorCode::invalid_argument, "SDAE output width must equal input width");
  require(config.corruption >= 0.0 && config.corruption < 1.0, ErrorCode::invalid_argument,
          "SDAE corruption rate must lie in [0, 1)");
  require(config.l2 >= 0.0, ErrorCode::invalid_argument, "SDAE l2 must be non-negative");
  SdaeModel m;
  Rng rng = make_rng(config.seed, "sdae.init");
  num::add_to_params(num::make_ffn(dims, config.hidden_activation, Activation::identity, rng), "sdae", m.params);
  m.activations.assign(dims.size() - 1, config.hidden_activation);
  m.activations.back() = Activation::identity;
  m.middle = static_cast<Index>(std::min_element(dims.begin() + 1, dims.end() - 1) - dims.begin()) - 1;
  return m;
}

Var sdae_objective(const SdaeModel& m, const num::BoundParams& bound, num::Tape& tape, const Matrix& input,
                   const Matrix& target, double l2, double data_weight) {
  Var rec = num::ffn_apply(bound, "sdae", m.activations, tape.constant(input));
  Var loss = ad::squared_error(rec, target);
  if (data_weight != 1.0) loss = ad::scale(loss, data_weight);
  if (l2 > 0.0)
    for (std::size_t l = 0; l < m.activations.size(); ++l)
      loss = ad::add(loss, ad::scale(ad::squared_norm(bound["sdae.W" + std::to_string(l)]), l2));
  return loss;
}

Matrix SdaeModel::reconstruct(const Matrix& x) const {
  num::Tape tape;
  auto bound = num::bind(tape, params);
  return num::ffn_apply(bound, "sdae", activations, tape.constant(x)).value();
}

Matrix SdaeModel::encode(const Matrix& x) const {
  num::Tape tape;
  auto bound = num::bind(tape, params);
  const std::vector<Activation> head(activations.begin(), activations.begin() + middle + 1);
  return num::ffn_apply(bound, "sdae", head, tape.constant(x)).value();
}

SdaeResult train_sdae(const Matrix& x, const SdaeConfig& config) {
  require(!config.dims.empty() && config.dims.front() == x.cols(), ErrorCode::dimension_mismatch,
          "SDAE input width does not match dims");
  require(config.mask_pool >= 1, ErrorCode::invalid_argument, "SDAE mask pool must hold at least one mask");
  SdaeResult result;
  result.model = make_sdae(config);

  const int copies = config.corruption > 0.0 ? config.mask_pool : 1;
  Matrix input(x.rows() * copies, x.cols()), target(x.rows() * copies, x.cols());
  Rng noise = make_rng(config.seed, "sdae.corruption");
  std::bernoulli_distribution keep(1.0 - config.corruption);
  for (int r = 0; r < copies; ++r) {
    Matrix masked = x;
    if (config.corruption > 0.0)
      for (Index j = 0; j < masked.cols(); ++j)
        for (Index i = 0; i < masked.rows(); ++i)
          if (!keep(noise)) masked(i, j) = 0.0;
    input.middleRows(r * x.rows(), x.rows()) = masked;
    target.middleRows(r * x.rows(), x.rows()) = x;
  }
  const double weight = 1.0 / copies;

  const num::Objective objective = [&](const num::ParamSet& p, std::vector<Matrix>* grads) {
    num::Tape tape;
    auto bound = num::bind(tape, p);
    Var loss = sdae_objective(result.model, bound, tape, input, target, config.l2, weight);
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "SDAE objective is not finite");
    if (grads) {
      tape.backward(loss);
      *grads = bound.grads(tape);
    }
    return loss.scalar();
  };
  num::DescentOptions opts;
  opts.adam.lr = config.learning_rate;
  opts.epochs = config.epochs;
  result.history = num::minimize_monotone(result.model.params, objective, opts).history;
  result.features = result.model.encode(x);
  return result;
}

}  // namespace repositioner::netembed
