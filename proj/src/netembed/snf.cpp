#include "repositioner/netembed/snf.hpp"

#include "repositioner/numerics/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace repositioner::netembed {

namespace {

void normalize_rows(Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    const double s = m.row(i).sum();
    if (s > 0.0) {
      m.row(i) /= s;
    } else {
      m.row(i).setZero();
      m(i, i) = 1.0;
    }
  }
}

double max_row_deviation(const std::vector<Matrix>& ps) {
  double worst = 0.0;
  for (const auto& p : ps) worst = std::max(worst, (p.rowwise().sum().array() - 1.0).abs().maxCoeff());
  return worst;
}

}  // namespace

Matrix snf_full_kernel(const Matrix& w) {
  const Index n = w.rows();
  Matrix p = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const double off = w.row(i).sum() - w(i, i);
    if (off <= 0.0) {
      p(i, i) = 1.0;
      continue;
    }
    for (Index j = 0; j < n; ++j)
      if (j != i) p(i, j) = w(i, j) / (2.0 * off);
    p(i, i) = 0.5;
  }
  return p;
}

Matrix snf_sparse_kernel(const Matrix& w, int k) {
  require(k >= 1, ErrorCode::invalid_argument, "SNF neighborhood size must be at least 1");
  const Index n = w.rows();
  Matrix s = Matrix::Zero(n, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return w(i, a) > w(i, b); });
    const Index keep = std::min<Index>(k, n);
    for (Index r = 0; r < keep; ++r) {
      const Index j = order[static_cast<std::size_t>(r)];
      if (w(i, j) > 0.0) s(i, j) = w(i, j);
    }
  }
  normalize_rows(s);
  return s;
}

Matrix snf_fuse(const std::vector<Matrix>& layers, const SnfConfig& config, SnfTrace* trace) {
  require(layers.size() >= 2, ErrorCode::invalid_argument, "SNF needs at least two layers");
  require(config.neighbors >= 1 && config.iterations >= 1, ErrorCode::invalid_argument,
          "SNF needs K >= 1 and T >= 1");
  const Index n = layers.front().rows();
  for (const auto& w : layers) {
    require(w.rows() == n && w.cols() == n, ErrorCode::dimension_mismatch,
            "SNF layers must share one square vocabulary");
    require(num::max_abs_asymmetry(w) <= 1e-12, ErrorCode::validation, "SNF layers must be symmetric");
    require(all_finite(w) && w.minCoeff() >= 0.0, ErrorCode::validation,
            "SNF layers must be finite and non-negative");
  }
  const std::size_t m = layers.size();
  std::vector<Matrix> p, s;
  for (const auto& w : layers) {
    p.push_back(snf_full_kernel(w));
    s.push_back(snf_sparse_kernel(w, config.neighbors));
  }
  if (trace) trace->row_sum_deviation = {max_row_deviation(p)};

  for (int t = 0; t < config.iterations; ++t) {
    Matrix total = Matrix::Zero(n, n);
    for (const auto& pv : p) total += pv;
    std::vector<Matrix> next(m);
    for (std::size_t v = 0; v < m; ++v) {
      const Matrix others = (total - p[v]) / static_cast<double>(m - 1);
      next[v] = s[v] * others * s[v].transpose();
      normalize_rows(next[v]);
    }
    p = std::move(next);
    if (trace) trace->row_sum_deviation.push_back(max_row_deviation(p));
  }
  Matrix fused = Matrix::Zero(n, n);
  for (const auto& pv : p) fused += pv;
  fused /= static_cast<double>(m);
  return 0.5 * (fused + fused.transpose());
}

}  // namespace repositioner::netembed
