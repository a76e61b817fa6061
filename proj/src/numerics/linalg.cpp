#include "repositioner/numerics/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace repositioner::num {

double max_abs_asymmetry(const Matrix& a) {
  if (a.rows() != a.cols()) return std::numeric_limits<double>::infinity();
  return (a - a.transpose()).cwiseAbs().maxCoeff();
}

namespace {

double off_diagonal_norm(const Matrix& a) {
  double sum = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j) sum += a(i, j) * a(i, j);
  return std::sqrt(sum);
}

void fix_sign(Eigen::Ref<Vector> v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) > 1e-12 * scale) {
      if (v(i) < 0) v = -v;
      return;
    }
  }
}

}  // namespace

SpectralDecomposition symmetric_eig(const Matrix& input, const JacobiOptions& options) {
  require(input.rows() == input.cols(), ErrorCode::dimension_mismatch,
          "symmetric_eig: matrix is " + std::to_string(input.rows()) + "x" + std::to_string(input.cols()));
  require(input.allFinite(), ErrorCode::non_finite, "symmetric_eig: non-finite entries");
  require(max_abs_asymmetry(input) <= options.symmetry_tolerance, ErrorCode::validation,
          "symmetric_eig: matrix is not symmetric");
  const Index n = input.rows();
  Matrix a = 0.5 * (input + input.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double norm = a.norm();

  bool converged = norm == 0.0;
  for (int sweep = 0; sweep < options.max_sweeps && !converged; ++sweep) {
    if (off_diagonal_norm(a) <= options.off_diagonal_tolerance * norm) {
      converged = true;
      break;
    }
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  if (!converged && off_diagonal_norm(a) > options.off_diagonal_tolerance * norm)
    fail(ErrorCode::convergence, "symmetric_eig: no convergence after " +
                                     std::to_string(options.max_sweeps) + " sweeps");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) {
    const double ax = std::abs(a(x, x)), ay = std::abs(a(y, y));
    if (ax != ay) return ax > ay;
    return a(x, x) > a(y, y);
  });
  SpectralDecomposition out{Vector(n), Matrix(n, n)};
  for (Index i = 0; i < n; ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    out.eigenvalues(i) = a(src, src);
    out.eigenvectors.col(i) = v.col(src);
    fix_sign(out.eigenvectors.col(i));
  }
  return out;
}

Matrix orthonormal_completion(const Matrix& basis, Index first_free) {
  Matrix q = basis;
  const Index n = q.rows();
  Index candidate = 0;
  for (Index j = first_free; j < q.cols(); ++j) {
    while (true) {
      require(candidate < n, ErrorCode::convergence, "orthonormal_completion: basis exhausted");
      Vector x = Vector::Unit(n, candidate++);
      for (int pass = 0; pass < 2; ++pass)
        for (Index i = 0; i < j; ++i) x -= q.col(i).dot(x) * q.col(i);
      const double norm = x.norm();
      if (norm > 1e-8) {
        q.col(j) = x / norm;
        break;
      }
    }
  }
  return q;
}

TruncatedSvd truncated_svd(const Matrix& a, Index k) {
  const Index n = a.rows(), m = a.cols();
  require(k >= 1 && k <= std::min(n, m), ErrorCode::invalid_argument,
          "truncated_svd: k=" + std::to_string(k) + " outside [1, " + std::to_string(std::min(n, m)) + "]");
  const bool use_right = m <= n;
  const Matrix gram = use_right ? Matrix(a.transpose() * a) : Matrix(a * a.transpose());
  SpectralDecomposition eig = symmetric_eig(0.5 * (gram + gram.transpose()));

  TruncatedSvd out;
  out.singular_values.resize(k);
  for (Index i = 0; i < k; ++i) out.singular_values(i) = std::sqrt(std::max(eig.eigenvalues(i), 0.0));
  const double tiny = std::sqrt(1e-13 * static_cast<double>(gram.rows())) * std::max(1.0, out.singular_values(0));

  const Matrix basis = eig.eigenvectors.leftCols(k);
  Matrix other = use_right ? Matrix(a * basis) : Matrix(a.transpose() * basis);
  Index rank = 0;
  for (Index i = 0; i < k; ++i) {
    if (out.singular_values(i) > tiny) {
      other.col(i) /= out.singular_values(i);
      rank = i + 1;
    } else {
      out.singular_values(i) = 0.0;
    }
  }
  if (rank < k) other = orthonormal_completion(other, rank);
  if (use_right) {
    out.v = basis;
    out.u = other;
  } else {
    out.u = basis;
    out.v = other;
  }
  return out;
}

}  // namespace repositioner::num
