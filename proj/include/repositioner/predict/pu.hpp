#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"

#include <cstdint>
#include <vector>

namespace repositioner::predict {

struct PuConfig {
  Index rank = 10;
  double epsilon = 0.1;  // weight of unobserved cells
  double lambda = 1e-3;
  int epochs = 300;
  double learning_rate = 0.05;
  std::uint64_t seed = 0;
};

// Inductive low-rank completion: S = X_d P O^T X_t^T.
struct PuModel {
  Matrix p;                // f_d x k
  Matrix o;                // f_t x k
  Matrix drug_features;    // n_d x f_d
  Matrix target_features;  // n_t x f_t
  double epsilon = 0.1;
  double lambda = 0.0;

  double score(Index drug, Index target) const;
  Matrix scores() const;
};

struct PuResult {
  PuModel model;
  std::vector<double> history;
  double final_objective = 0.0;
};

// sum_{M=1} (1 - s)^2 + eps * sum_{M=0} s^2 + lambda (||P||^2 + ||O||^2)
double pu_objective(const Matrix& m, const Matrix& xd, const Matrix& xt, const Matrix& p, const Matrix& o,
                    double epsilon, double lambda);
num::Var pu_objective(num::Tape& tape, const Matrix& m, const Matrix& xd, const Matrix& xt, const num::Var& p,
                      const num::Var& o, double epsilon, double lambda);

PuResult pu_complete(const Matrix& m, const Matrix& drug_features, const Matrix& target_features,
                     const PuConfig& config);

}  // namespace repositioner::predict
