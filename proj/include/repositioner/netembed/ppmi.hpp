#pragma once

#include "repositioner/common.hpp"
#include "repositioner/data/network.hpp"

#include <string>

namespace repositioner::netembed {

struct SurfOptions {
  double alpha = 0.98;  // probability of following an edge rather than staying
  int steps = 10;
};

struct PpmiMatrix {
  Matrix values;
  std::string source;
  SurfOptions options;
};

// Transition matrix alpha * D^-1 A + (1 - alpha) I. Rows of nodes without
// edges are all zero.
Matrix surf_transition(const Matrix& adjacency, double alpha);

// C = sum_{k=1..K} P^k.
Matrix surf_cooccurrence(const Matrix& adjacency, const SurfOptions& options);

// max(0, log(C_ij * sum(C) / (rowsum_i * colsum_j))), exactly 0 where C_ij = 0.
Matrix ppmi_from_cooccurrence(const Matrix& cooccurrence);

PpmiMatrix random_surf_ppmi(const Matrix& adjacency, const SurfOptions& options = {},
                            std::string source = {});
PpmiMatrix random_surf_ppmi(const data::NetworkLayer& layer, const SurfOptions& options = {});

}  // namespace repositioner::netembed
