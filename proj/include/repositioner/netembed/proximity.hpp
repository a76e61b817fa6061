#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/linalg.hpp"

#include <vector>

namespace repositioner::netembed {

// S = F(M) = w_1 M + w_2 M^2 + ... + w_l M^l, embedded in dim dimensions.
struct ProximityConfig {
  std::vector<double> weights{1.0};
  Index dim = 32;

  void validate() const;
};

struct ProximityEmbedding {
  Matrix content;  // U*, n x dim
  Matrix context;  // V*, n x dim
  Vector values;   // F(lambda) of the selected eigenpairs
};

// Holds one eigendecomposition of M and embeds any number of configs from it.
class ProximityEmbedder {
 public:
  explicit ProximityEmbedder(const Matrix& adjacency);
  ProximityEmbedding embed(const ProximityConfig& config) const;
  const num::SpectralDecomposition& spectrum() const { return spectrum_; }
  Index size() const { return spectrum_.eigenvalues.size(); }

 private:
  num::SpectralDecomposition spectrum_;
};

ProximityEmbedding arbitrary_proximity_embed(const Matrix& adjacency, const ProximityConfig& config);

double proximity_polynomial(double lambda, const std::vector<double>& weights);
Matrix proximity_matrix(const Matrix& adjacency, const std::vector<double>& weights);

// ||F(M) - U* V*^T||_F^2
double proximity_residual(const Matrix& adjacency, const std::vector<double>& weights,
                          const ProximityEmbedding& embedding);

}  // namespace repositioner::netembed
