#pragma once

#include "repositioner/common.hpp"

#include <cstdint>
#include <memory>
#include <vector>

namespace repositioner::predict {

// Pair classifier behind the proximity-embedding model. The logistic model is
// the only implementation; the interface leaves room for a tree ensemble.
class BinaryClassifier {
 public:
  virtual ~BinaryClassifier() = default;
  virtual Vector predict_proba(const Matrix& features) const = 0;
};

struct LogisticConfig {
  double lambda = 1e-3;  // on ||w||^2, bias unpenalized
  int epochs = 300;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

class LogisticClassifier : public BinaryClassifier {
 public:
  LogisticClassifier() = default;
  LogisticClassifier(Vector weights, double bias) : weights_(std::move(weights)), bias_(bias) {}
  Vector predict_proba(const Matrix& features) const override;
  Vector logits(const Matrix& features) const;
  const Vector& weights() const { return weights_; }
  double bias() const { return bias_; }

 private:
  Vector weights_;
  double bias_ = 0.0;
};

struct ClassifierResult {
  LogisticClassifier model;
  std::vector<double> history;  // mean logistic loss + penalty
};

// Weights of 1 per row unless `row_weights` is given.
ClassifierResult train_classifier(const Matrix& features, const std::vector<int>& labels, const LogisticConfig& config,
                                  const Vector* row_weights = nullptr);

}  // namespace repositioner::predict
