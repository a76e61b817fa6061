#include "repositioner/netembed/proximity.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repositioner::netembed {

void ProximityConfig::validate() const {
  require(!weights.empty(), ErrorCode::invalid_argument, "proximity order must be at least 1");
  for (double w : weights)
    require(std::isfinite(w) && w > 0.0, ErrorCode::invalid_argument, "proximity weights must be positive");
  require(dim >= 1, ErrorCode::invalid_argument, "proximity dimension must be at least 1");
}

double proximity_polynomial(double lambda, const std::vector<double>& weights) {
  double power = 1.0, total = 0.0;
  for (double w : weights) {
    power *= lambda;
    total += w * power;
  }
  return total;
}

Matrix proximity_matrix(const Matrix& m, const std::vector<double>& weights) {
  Matrix power = Matrix::Identity(m.rows(), m.cols());
  Matrix s = Matrix::Zero(m.rows(), m.cols());
  for (double w : weights) {
    power = power * m;
    s += w * power;
  }
  return s;
}

ProximityEmbedder::ProximityEmbedder(const Matrix& adjacency) : spectrum_(num::symmetric_eig(adjacency)) {}

ProximityEmbedding ProximityEmbedder::embed(const ProximityConfig& config) const {
  config.validate();
  const Index n = size();
  require(config.dim <= n, ErrorCode::invalid_argument,
          "proximity dimension " + std::to_string(config.dim) + " exceeds node count " + std::to_string(n));
  Vector f(n);
  for (Index j = 0; j < n; ++j) f(j) = proximity_polynomial(spectrum_.eigenvalues(j), config.weights);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return std::abs(f(a)) > std::abs(f(b)); });

  ProximityEmbedding out;
  out.content.resize(n, config.dim);
  out.context.resize(n, config.dim);
  out.values.resize(config.dim);
  for (Index c = 0; c < config.dim; ++c) {
    const Index j = order[static_cast<std::size_t>(c)];
    const double root = std::sqrt(std::abs(f(j)));
    const double sign = f(j) < 0.0 ? -1.0 : 1.0;
    out.content.col(c) = spectrum_.eigenvectors.col(j) * root;
    out.context.col(c) = spectrum_.eigenvectors.col(j) * (sign * root);
    out.values(c) = f(j);
  }
  return out;
}

ProximityEmbedding arbitrary_proximity_embed(const Matrix& adjacency, const ProximityConfig& config) {
  config.validate();
  require(config.dim <= adjacency.rows(), ErrorCode::invalid_argument,
          "proximity dimension " + std::to_string(config.dim) + " exceeds node count " +
              std::to_string(adjacency.rows()));
  return ProximityEmbedder(adjacency).embed(config);
}

double proximity_residual(const Matrix& adjacency, const std::vector<double>& weights,
                          const ProximityEmbedding& embedding) {
  return (proximity_matrix(adjacency, weights) - embedding.content * embedding.context.transpose()).squaredNorm();
}

}  // namespace repositioner::netembed
