#include "repositioner/predict/classifier.hpp"

#include "repositioner/numerics/params.hpp"

#include <cmath>

namespace repositioner::predict {

namespace ad = num::ad;

Vector LogisticClassifier::logits(const Matrix& features) const {
  require(features.cols() == weights_.size(), ErrorCode::dimension_mismatch,
          "classifier expects " + std::to_string(weights_.size()) + " features, got " + std::to_string(features.cols()));
  return (features * weights_).array() + bias_;
}

Vector LogisticClassifier::predict_proba(const Matrix& features) const {
  return logits(features).unaryExpr([](double z) { return 1.0 / (1.0 + std::exp(-z)); });
}

ClassifierResult train_classifier(const Matrix& features, const std::vector<int>& labels, const LogisticConfig& config,
                                  const Vector* row_weights) {
  require(static_cast<Index>(labels.size()) == features.rows(), ErrorCode::dimension_mismatch,
          "classifier needs one label per row");
  require(config.lambda >= 0.0, ErrorCode::invalid_argument, "classifier lambda must be non-negative");
  Matrix y(features.rows(), 1);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] == 0 || labels[i] == 1, ErrorCode::validation, "classifier labels must be 0 or 1");
    y(static_cast<Index>(i), 0) = labels[i];
    positives += static_cast<std::size_t>(labels[i]);
  }
  require(positives > 0 && positives < labels.size(), ErrorCode::invalid_argument,
          "classifier needs both positive and negative examples");
  Matrix w = row_weights ? Matrix(*row_weights) : Matrix::Ones(features.rows(), 1);
  require(w.rows() == features.rows(), ErrorCode::dimension_mismatch, "one weight per row");
  w /= w.sum();

  num::ParamSet params;
  Rng rng = make_rng(config.seed, "classifier.init");
  params.add("w", random_normal(features.cols(), 1, 0.01, rng));
  params.add("b", Matrix::Zero(1, 1));
  const num::Objective objective = [&](const num::ParamSet& p, std::vector<Matrix>* grads) {
    num::Tape tape;
    auto bound = num::bind(tape, p);
    const num::Var z = ad::add_row(ad::matmul(tape.constant(features), bound["w"]), bound["b"]);
    num::Var loss = ad::bce_with_logits(z, y, w);
    if (config.lambda > 0.0) loss = ad::add(loss, ad::scale(ad::squared_norm(bound["w"]), config.lambda));
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "classifier loss is not finite");
    if (grads) {
      tape.backward(loss);
      *grads = bound.grads(tape);
    }
    return loss.scalar();
  };
  num::DescentOptions opts;
  opts.adam.lr = config.learning_rate;
  opts.epochs = config.epochs;
  ClassifierResult result;
  result.history = num::minimize_monotone(params, objective, opts).history;
  result.model = LogisticClassifier(params.get("w").col(0), params.get("b")(0, 0));
  return result;
}

}  // namespace repositioner::predict
