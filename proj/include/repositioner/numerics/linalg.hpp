#pragma once

#include "repositioner/common.hpp"

namespace repositioner::num {

struct SpectralDecomposition {
  Vector eigenvalues;   // sorted by descending magnitude
  Matrix eigenvectors;  // columns, orthonormal; first nonzero coordinate positive
};

struct JacobiOptions {
  double off_diagonal_tolerance = 1e-12;  // relative to the Frobenius norm
  int max_sweeps = 100;
  double symmetry_tolerance = 1e-10;
};

// Cyclic Jacobi rotations. Throws on non-square or asymmetric input and when
// the off-diagonal norm has not dropped below tolerance after max_sweeps.
SpectralDecomposition symmetric_eig(const Matrix& a, const JacobiOptions& options = {});

struct TruncatedSvd {
  Matrix u;                // n x k
  Vector singular_values;  // k, descending
  Matrix v;                // m x k

  Matrix reconstruct() const { return u * singular_values.asDiagonal() * v.transpose(); }
};

// Best rank-k approximation via the eigen-decomposition of the smaller Gram
// matrix. Requires 1 <= k <= min(rows, cols).
TruncatedSvd truncated_svd(const Matrix& a, Index k);

double max_abs_asymmetry(const Matrix& a);

// Columns made orthonormal against each other; columns that vanish after
// projection are replaced by completion vectors.
Matrix orthonormal_completion(const Matrix& basis, Index first_free);

}  // namespace repositioner::num
