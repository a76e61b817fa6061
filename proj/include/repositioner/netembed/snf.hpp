#pragma once

#include "repositioner/common.hpp"

#include <vector>

namespace repositioner::netembed {

struct SnfConfig {
  int neighbors = 20;   // K
  int iterations = 20;  // T
};

struct SnfTrace {
  // Largest |row sum - 1| over all status matrices, per iteration (index 0 is
  // the initial state).
  std::vector<double> row_sum_deviation;
};

// P_ij = W_ij / (2 sum_{k != i} W_ik) off the diagonal, P_ii = 1/2. A row
// without off-diagonal mass becomes e_i.
Matrix snf_full_kernel(const Matrix& w);

// Keeps the K largest entries of each row (ties to the lower column index),
// row-normalized. A row without positive entries becomes e_i.
Matrix snf_sparse_kernel(const Matrix& w, int k);

Matrix snf_fuse(const std::vector<Matrix>& layers, const SnfConfig& config, SnfTrace* trace = nullptr);

}  // namespace repositioner::netembed
