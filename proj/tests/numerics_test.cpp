#include "repositioner/numerics/autodiff.hpp"
#include "repositioner/numerics/ffn.hpp"
#include "repositioner/numerics/linalg.hpp"
#include "repositioner/numerics/params.hpp"

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>

using namespace repositioner;
using namespace repositioner::num;

namespace {

Matrix random_symmetric(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix a = random_normal(n, n, 1.0, rng);
  return 0.5 * (a + a.transpose());
}

// Independent oracle: singular values from Eigen's two-sided Jacobi SVD.
double oracle_tail(const Matrix& a, Index k) {
  Eigen::JacobiSVD<Matrix> svd(a);
  const Vector s = svd.singularValues();
  return s.tail(s.size() - k).squaredNorm();
}

}  // namespace

TEST(SymmetricEig, IdentityHasUnitEigenvalues) {
  auto eig = symmetric_eig(Matrix::Identity(3, 3));
  EXPECT_EQ(eig.eigenvalues, Vector::Ones(3));
}

TEST(SymmetricEig, DiagonalSortedByMagnitude) {
  Matrix d = Vector(Eigen::Vector3d(3, -2, 1)).asDiagonal();
  auto eig = symmetric_eig(d);
  EXPECT_DOUBLE_EQ(eig.eigenvalues(0), 3);
  EXPECT_DOUBLE_EQ(eig.eigenvalues(1), -2);
  EXPECT_DOUBLE_EQ(eig.eigenvalues(2), 1);
}

TEST(SymmetricEig, RandomResidualsAndOrthonormality) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix a = random_symmetric(8, seed);
    auto eig = symmetric_eig(a);
    const Matrix& v = eig.eigenvectors;
    EXPECT_LE((v.transpose() * v - Matrix::Identity(8, 8)).cwiseAbs().maxCoeff(), 1e-8);
    for (Index i = 0; i < 8; ++i) {
      const Vector r = a * v.col(i) - eig.eigenvalues(i) * v.col(i);
      EXPECT_LT(r.norm(), 1e-8 * std::max(1.0, std::abs(eig.eigenvalues(i))));
    }
    const Matrix rebuilt = v * eig.eigenvalues.asDiagonal() * v.transpose();
    EXPECT_LE((rebuilt - a).norm() / a.norm(), 1e-8);
    for (Index i = 1; i < 8; ++i)
      EXPECT_GE(std::abs(eig.eigenvalues(i - 1)), std::abs(eig.eigenvalues(i)));
  }
}

TEST(SymmetricEig, SignConventionFirstNonzeroPositive) {
  auto eig = symmetric_eig(random_symmetric(6, 42));
  for (Index j = 0; j < 6; ++j) {
    Index i = 0;
    while (std::abs(eig.eigenvectors(i, j)) < 1e-12) ++i;
    EXPECT_GT(eig.eigenvectors(i, j), 0.0);
  }
}

TEST(SymmetricEig, Errors) {
  EXPECT_THROW(symmetric_eig(Matrix::Zero(2, 3)), Error);
  Matrix asym = Matrix::Identity(3, 3);
  asym(0, 1) = 1e-3;
  EXPECT_THROW(symmetric_eig(asym), Error);
  JacobiOptions opts;
  opts.max_sweeps = 0;
  try {
    symmetric_eig(random_symmetric(5, 3), opts);
    FAIL() << "expected convergence error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::convergence);
  }
}

TEST(SymmetricEig, DeterministicAcrossCalls) {
  const Matrix a = random_symmetric(9, 7);
  auto x = symmetric_eig(a), y = symmetric_eig(a);
  EXPECT_EQ(x.eigenvalues, y.eigenvalues);
  EXPECT_EQ(x.eigenvectors, y.eigenvectors);
}

TEST(TruncatedSvd, IdentityRankTwo) {
  auto svd = truncated_svd(Matrix::Identity(4, 4), 2);
  EXPECT_NEAR((Matrix::Identity(4, 4) - svd.reconstruct()).squaredNorm(), 2.0, 1e-12);
}

TEST(TruncatedSvd, DiagonalDropsSmallest) {
  Matrix d = Vector(Eigen::Vector3d(3, 2, 1)).asDiagonal();
  auto svd = truncated_svd(d, 2);
  EXPECT_NEAR((d - svd.reconstruct()).squaredNorm(), 1.0, 1e-12);
}

TEST(TruncatedSvd, MatchesFullSvdOracle) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    const Matrix a = random_normal(20, 12, 1.0, rng);
    auto svd = truncated_svd(a, 5);
    EXPECT_NEAR((a - svd.reconstruct()).squaredNorm(), oracle_tail(a, 5), 1e-8);
    // Wide input goes through the other Gram matrix.
    const Matrix wide = a.transpose();
    auto svd_wide = truncated_svd(wide, 5);
    EXPECT_NEAR((wide - svd_wide.reconstruct()).squaredNorm(), oracle_tail(wide, 5), 1e-8);
  }
}

TEST(TruncatedSvd, RankDeficientKeepsOrthonormalFactors) {
  Rng rng(5);
  const Matrix a = random_normal(10, 2, 1.0, rng) * random_normal(2, 6, 1.0, rng);
  auto svd = truncated_svd(a, 4);
  EXPECT_LE((svd.u.transpose() * svd.u - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_NEAR((a - svd.reconstruct()).squaredNorm(), 0.0, 1e-8);
}

TEST(TruncatedSvd, RankOutOfRange) {
  EXPECT_THROW(truncated_svd(Matrix::Identity(3, 3), 0), Error);
  EXPECT_THROW(truncated_svd(Matrix::Identity(3, 3), 4), Error);
}

TEST(Ffn, ZeroWeightLinearLayerHasZeroLossAndGradient) {
  FeedForwardNet net;
  net.layers.push_back({Matrix::Zero(3, 2), Eigen::RowVectorXd::Zero(2), Activation::identity});
  Rng rng(1);
  auto out = ffn_forward_backward(net, random_normal(4, 3, 1.0, rng), {LossKind::squared, Matrix::Zero(4, 2)});
  EXPECT_EQ(out.loss, 0.0);
  EXPECT_EQ(out.weight_grads[0].cwiseAbs().maxCoeff(), 0.0);
  EXPECT_EQ(out.bias_grads[0].cwiseAbs().maxCoeff(), 0.0);
}

TEST(Ffn, IdentityNetReproducesInput) {
  FeedForwardNet net;
  net.layers.push_back({Matrix::Identity(3, 3), Eigen::RowVectorXd::Zero(3), Activation::identity});
  Rng rng(2);
  const Matrix x = random_normal(5, 3, 1.0, rng);
  EXPECT_EQ(ffn_forward_backward(net, x, {LossKind::squared, x}).loss, 0.0);
}

TEST(Ffn, GradientsMatchFiniteDifferences) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    FeedForwardNet net = make_ffn({4, 5, 3}, Activation::sigmoid, Activation::identity, rng);
    net.layers[0].bias = random_normal(1, 5, 0.5, rng).row(0);
    net.l2 = 0.01;
    const Matrix x = random_normal(6, 4, 1.0, rng);
    const Matrix y = random_normal(6, 3, 1.0, rng);
    for (LossKind kind : {LossKind::squared, LossKind::logistic}) {
      const Matrix target = kind == LossKind::squared ? y : Matrix((y.array() > 0).cast<double>());
      auto analytic = ffn_forward_backward(net, x, {kind, target});
      Vector flat_grad(0), point(0);
      std::vector<double> g, p;
      for (std::size_t l = 0; l < net.layers.size(); ++l) {
        for (Index i = 0; i < net.layers[l].weight.size(); ++i) {
          p.push_back(net.layers[l].weight(i));
          g.push_back(analytic.weight_grads[l](i));
        }
        for (Index i = 0; i < net.layers[l].bias.size(); ++i) {
          p.push_back(net.layers[l].bias(i));
          g.push_back(analytic.bias_grads[l](i));
        }
      }
      point = Eigen::Map<Vector>(p.data(), static_cast<Index>(p.size()));
      flat_grad = Eigen::Map<Vector>(g.data(), static_cast<Index>(g.size()));
      auto fn = [&](const Vector& v) {
        FeedForwardNet copy = net;
        Index k = 0;
        for (auto& layer : copy.layers) {
          for (Index i = 0; i < layer.weight.size(); ++i) layer.weight(i) = v(k++);
          for (Index i = 0; i < layer.bias.size(); ++i) layer.bias(i) = v(k++);
        }
        return ffn_forward_backward(copy, x, {kind, target}).loss;
      };
      EXPECT_LE(finite_diff_check(fn, point, flat_grad), 1e-4);
    }
  }
}

TEST(Ffn, Errors) {
  Rng rng(3);
  FeedForwardNet net = make_ffn({3, 2}, Activation::identity, Activation::identity, rng);
  EXPECT_THROW(ffn_forward_backward(net, Matrix::Zero(2, 4), {LossKind::squared, Matrix::Zero(2, 2)}), Error);
  net.layers[0].weight(0, 0) = std::numeric_limits<double>::infinity();
  try {
    ffn_forward_backward(net, Matrix::Ones(2, 3), {LossKind::squared, Matrix::Zero(2, 2)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::non_finite);
    EXPECT_NE(std::string(e.what()).find("layer 0"), std::string::npos);
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<Matrix> params{Matrix::Constant(2, 2, 1.5)};
  auto state = make_adam_state(params);
  adam_step(params, {Matrix::Zero(2, 2)}, state, {});
  EXPECT_EQ(params[0], Matrix::Constant(2, 2, 1.5));
  EXPECT_EQ(state.steps[0], 1);
}

TEST(Adam, ConstantGradientStepApproachesLearningRate) {
  std::vector<Matrix> params{Matrix::Zero(1, 2)};
  auto state = make_adam_state(params);
  Matrix g(1, 2);
  g << 3.0, -0.5;
  AdamConfig cfg;
  cfg.lr = 0.01;
  Matrix before = params[0];
  for (int i = 0; i < 200; ++i) {
    before = params[0];
    adam_step(params, {g}, state, cfg);
  }
  const Matrix step = params[0] - before;
  EXPECT_NEAR(step(0, 0), -0.01, 1e-8);
  EXPECT_NEAR(step(0, 1), 0.01, 1e-8);
}

TEST(Adam, QuadraticRolloutMatchesScalarOracleAndDecreases) {
  // Scalar oracle of the textbook update.
  double x = 1.0, m = 0.0, v = 0.0;
  std::vector<double> oracle;
  for (int t = 1; t <= 10; ++t) {
    const double g = 2.0 * x;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    x -= 0.1 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
    oracle.push_back(x);
  }
  std::vector<Matrix> params{Matrix::Constant(1, 1, 1.0)};
  auto state = make_adam_state(params);
  AdamConfig cfg;
  cfg.lr = 0.1;
  double previous = 1.0;
  for (int t = 0; t < 10; ++t) {
    adam_step(params, {2.0 * params[0]}, state, cfg);
    EXPECT_NEAR(params[0](0, 0), oracle[static_cast<std::size_t>(t)], 1e-15);
    EXPECT_LT(std::abs(params[0](0, 0)), previous);
    previous = std::abs(params[0](0, 0));
  }
}

TEST(Adam, ShapeMismatchAndInactiveParameters) {
  std::vector<Matrix> params{Matrix::Zero(2, 2), Matrix::Zero(1, 1)};
  auto state = make_adam_state(params);
  EXPECT_THROW(adam_step(params, {Matrix::Zero(3, 2), Matrix::Zero(1, 1)}, state, {}), Error);
  std::vector<bool> active{false, true};
  adam_step(params, {Matrix::Ones(2, 2), Matrix::Ones(1, 1)}, state, {}, &active);
  EXPECT_EQ(params[0], Matrix::Zero(2, 2));
  EXPECT_EQ(state.steps[0], 0);
  EXPECT_EQ(state.steps[1], 1);
}

TEST(FiniteDiff, LinearAndQuadratic) {
  Rng rng(9);
  const Vector x = random_normal(7, 1, 1.0, rng).col(0);
  EXPECT_LE(finite_diff_check([](const Vector& v) { return v.sum(); }, x, Vector::Ones(7)), 1e-9);
  EXPECT_LE(finite_diff_check([](const Vector& v) { return 0.5 * v.squaredNorm(); }, x, x), 1e-6);
  EXPECT_THROW(finite_diff_check([](const Vector&) { return std::nan(""); }, x, x), Error);
}

// Every tape operation against finite differences.
class TapeOpGradient : public ::testing::TestWithParam<int> {};

TEST_P(TapeOpGradient, MatchesFiniteDifferences) {
  const int op = GetParam();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed * 31 + static_cast<std::uint64_t>(op));
    ParamSet params;
    params.add("a", random_normal(4, 3, 1.0, rng));
    params.add("b", random_normal(4, 3, 1.0, rng));
    params.add("c", random_normal(3, 2, 1.0, rng));
    params.add("r", random_normal(1, 3, 1.0, rng));
    params.add("k", random_normal(4, 1, 1.0, rng));
    const Matrix labels = (random_normal(4, 3, 1.0, rng).array() > 0).cast<double>();
    Objective f = [&](const ParamSet& p, std::vector<Matrix>* grads) {
      Tape tape;
      auto bp = bind(tape, p);
      const Var a = bp["a"], b = bp["b"], c = bp["c"], r = bp["r"], k = bp["k"];
      Var out;
      switch (op) {
        case 0: out = ad::sum(ad::square(ad::matmul(a, c))); break;
        case 1: out = ad::sum(ad::hadamard(ad::sigmoid(a), ad::tanh(b))); break;
        case 2: out = ad::sum(ad::square(ad::add_row(a, r))); break;
        case 3: out = ad::sum(ad::square(ad::mul_row(a, r))); break;
        case 4: out = ad::sum(ad::square(ad::mul_col(a, k))); break;
        case 5: out = ad::sum(ad::hadamard(ad::softmax_rows(a), b)); break;
        case 6: out = ad::sum(ad::square(ad::max_rows(a))); break;
        case 7: out = ad::sum(ad::square(ad::row_dot(a, b))); break;
        case 8: out = ad::sum(ad::square(ad::gather_rows(a, {2, 0, 2, 3}))); break;
        case 9: out = ad::sum(ad::square(ad::concat_cols({a, b, ad::slice_cols(a, 1, 2)}))); break;
        case 10: out = ad::sum(ad::square(ad::concat_rows({a, ad::slice_rows(b, 1, 2)}))); break;
        case 11: out = ad::sum(ad::square(ad::unfold_rows(a, 2))); break;
        case 12: out = ad::bce_with_logits(a, labels); break;
        case 13: out = ad::sum(ad::log_sigmoid(ad::sub(a, b))); break;
        case 14: out = ad::sum(ad::hadamard(ad::sin(a), ad::cos(b))); break;
        case 15: out = ad::sum(ad::sqrt(ad::add_scalar(ad::square(a), 0.5))); break;
        case 16: out = ad::sum(ad::hadamard(ad::relu(a), b)); break;
        case 17: out = ad::mean(ad::exp(ad::scale(ad::transpose(a), 0.3))); break;
        case 18: out = ad::sum(ad::log(ad::softplus(a))); break;
        case 19: out = ad::sum(ad::square(ad::mean_rows(ad::sum_cols(a)))); break;
        default: out = ad::squared_error(a, labels); break;
      }
      if (grads) {
        tape.backward(out);
        *grads = bp.grads(tape);
      }
      return out.scalar();
    };
    EXPECT_LE(gradient_check(params, f), 1e-4) << "op " << op << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(AllOps, TapeOpGradient, ::testing::Range(0, 21));

TEST(MinimizeMonotone, HistoryIsNonIncreasing) {
  ParamSet p;
  Rng rng(4);
  p.add("x", random_normal(3, 1, 2.0, rng));
  Objective f = [](const ParamSet& ps, std::vector<Matrix>* g) {
    const Matrix& x = ps.get("x");
    // Rosenbrock-like valley to provoke overshoot at a large learning rate.
    const double a = x(0), b = x(1), c = x(2);
    const double val = (1 - a) * (1 - a) + 10 * (b - a * a) * (b - a * a) + c * c;
    if (g) {
      Matrix gx(3, 1);
      gx << -2 * (1 - a) - 40 * a * (b - a * a), 20 * (b - a * a), 2 * c;
      *g = {gx};
    }
    return val;
  };
  DescentOptions opts;
  opts.adam.lr = 0.5;
  opts.epochs = 300;
  auto result = minimize_monotone(p, f, opts);
  for (std::size_t i = 1; i < result.history.size(); ++i)
    EXPECT_LE(result.history[i], result.history[i - 1]);
  EXPECT_LT(result.history.back(), 0.1 * result.history.front());
}
