#include "repositioner/predict/pu.hpp"

#include "repositioner/numerics/params.hpp"

#include <algorithm>
#include <cmath>

namespace repositioner::predict {

namespace ad = num::ad;

namespace {

Matrix cell_weights(const Matrix& m, double epsilon) {
  return m.unaryExpr([epsilon](double v) { return v != 0.0 ? 1.0 : epsilon; });
}

}  // namespace

double PuModel::score(Index drug, Index target) const {
  require(drug >= 0 && drug < drug_features.rows(), ErrorCode::not_found, "unknown drug index");
  require(target >= 0 && target < target_features.rows(), ErrorCode::not_found, "unknown target index");
  return (drug_features.row(drug) * p * o.transpose() * target_features.row(target).transpose())(0, 0);
}

Matrix PuModel::scores() const { return drug_features * p * o.transpose() * target_features.transpose(); }

double pu_objective(const Matrix& m, const Matrix& xd, const Matrix& xt, const Matrix& p, const Matrix& o,
                    double epsilon, double lambda) {
  const Matrix r = m - xd * p * o.transpose() * xt.transpose();
  return (cell_weights(m, epsilon).array() * r.array().square()).sum() +
         lambda * (p.squaredNorm() + o.squaredNorm());
}

num::Var pu_objective(num::Tape& tape, const Matrix& m, const Matrix& xd, const Matrix& xt, const num::Var& p,
                      const num::Var& o, double epsilon, double lambda) {
  const num::Var s = ad::matmul(ad::matmul(tape.constant(xd), p), ad::transpose(ad::matmul(tape.constant(xt), o)));
  const num::Var r = ad::sub(s, tape.constant(m));
  num::Var loss = ad::sum(ad::hadamard(tape.constant(cell_weights(m, epsilon)), ad::square(r)));
  if (lambda > 0.0) loss = ad::add(loss, ad::scale(ad::add(ad::squared_norm(p), ad::squared_norm(o)), lambda));
  return loss;
}

PuResult pu_complete(const Matrix& m, const Matrix& xd, const Matrix& xt, const PuConfig& config) {
  require((m.array() == 0.0 || m.array() == 1.0).all(), ErrorCode::validation, "interaction matrix must be binary");
  require(xd.rows() == m.rows() && xt.rows() == m.cols(), ErrorCode::dimension_mismatch,
          "feature rows must match the interaction matrix");
  const Index limit = std::min(m.rows(), m.cols()) / 2;
  require(config.rank >= 1 && config.rank <= limit, ErrorCode::invalid_argument,
          "PU rank " + std::to_string(config.rank) + " outside [1, " + std::to_string(limit) + "]");
  require(config.epsilon > 0.0 && config.epsilon < 1.0, ErrorCode::invalid_argument,
          "PU epsilon must lie in (0, 1)");
  require(config.lambda >= 0.0, ErrorCode::invalid_argument, "PU lambda must be non-negative");

  PuResult result;
  Rng rng = make_rng(config.seed, "pu.init");
  num::ParamSet params;
  params.add("P", random_normal(xd.cols(), config.rank, 0.1, rng));
  params.add("O", random_normal(xt.cols(), config.rank, 0.1, rng));
  const num::Objective objective = [&](const num::ParamSet& ps, std::vector<Matrix>* grads) {
    num::Tape tape;
    auto bound = num::bind(tape, ps);
    auto loss = pu_objective(tape, m, xd, xt, bound["P"], bound["O"], config.epsilon, config.lambda);
    require(std::isfinite(loss.scalar()), ErrorCode::non_finite, "PU objective is not finite");
    if (grads) {
      tape.backward(loss);
      *grads = bound.grads(tape);
    }
    return loss.scalar();
  };
  num::DescentOptions opts;
  opts.adam.lr = config.learning_rate;
  opts.epochs = config.epochs;
  result.history = num::minimize_monotone(params, objective, opts).history;
  result.final_objective = result.history.back();
  result.model = {params.get("P"), params.get("O"), xd, xt, config.epsilon, config.lambda};
  return result;
}

}  // namespace repositioner::predict
