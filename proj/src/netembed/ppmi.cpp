#include "repositioner/netembed/ppmi.hpp"

#include <cmath>

namespace repositioner::netembed {

Matrix surf_transition(const Matrix& adjacency, double alpha) {
  require(adjacency.rows() == adjacency.cols(), ErrorCode::dimension_mismatch,
          "random surf needs a square adjacency matrix");
  require(alpha > 0.0 && alpha <= 1.0, ErrorCode::invalid_argument,
          "random surf alpha must lie in (0, 1], got " + std::to_string(alpha));
  require(all_finite(adjacency) && adjacency.minCoeff() >= 0.0, ErrorCode::validation,
          "adjacency weights must be finite and non-negative");
  const Index n = adjacency.rows();
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double degree = adjacency.row(i).sum();
    if (degree <= 0.0) continue;
    p.row(i) = alpha * adjacency.row(i) / degree;
    p(i, i) += 1.0 - alpha;
  }
  return p;
}

Matrix surf_cooccurrence(const Matrix& adjacency, const SurfOptions& options) {
  require(options.steps >= 1, ErrorCode::invalid_argument, "random surf needs at least one step");
  const Matrix p = surf_transition(adjacency, options.alpha);
  Matrix power = p;
  Matrix c = p;
  for (int k = 2; k <= options.steps; ++k) {
    power = power * p;
    c += power;
  }
  return c;
}

Matrix ppmi_from_cooccurrence(const Matrix& c) {
  const double total = c.sum();
  const Vector rows = c.rowwise().sum();
  const Eigen::RowVectorXd cols = c.colwise().sum();
  Matrix out = Matrix::Zero(c.rows(), c.cols());
  for (Index i = 0; i < c.rows(); ++i)
    for (Index j = 0; j < c.cols(); ++j) {
      if (c(i, j) <= 0.0) continue;
      out(i, j) = std::max(0.0, std::log(c(i, j) * total / (rows(i) * cols(j))));
    }
  return out;
}

PpmiMatrix random_surf_ppmi(const Matrix& adjacency, const SurfOptions& options, std::string source) {
  return {ppmi_from_cooccurrence(surf_cooccurrence(adjacency, options)), std::move(source), options};
}

PpmiMatrix random_surf_ppmi(const data::NetworkLayer& layer, const SurfOptions& options) {
  require(layer.square(), ErrorCode::validation, "layer '" + layer.name + "' is not square");
  return random_surf_ppmi(layer.dense(), options, layer.name);
}

}  // namespace repositioner::netembed
