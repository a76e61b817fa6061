#include "repositioner/numerics/autodiff.hpp"

#include <cmath>

namespace repositioner::num {

const Matrix& Var::value() const {
  require(tape_ != nullptr, ErrorCode::invalid_argument, "unbound Var");
  return tape_->value_of(id_);
}

double Var::scalar() const {
  const Matrix& v = value();
  require(v.rows() == 1 && v.cols() == 1, ErrorCode::dimension_mismatch, "Var is not a scalar");
  return v(0, 0);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), false, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::variable(Matrix value) {
  nodes_.push_back({std::move(value), Matrix(), true, false, nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::scalar_constant(double value) { return constant(Matrix::Constant(1, 1, value)); }

Var Tape::record(Matrix value, std::initializer_list<Var> parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    require(p.tape() == this, ErrorCode::invalid_argument, "Var from a different tape");
    needs = needs || nodes_[p.id()].needs_grad;
  }
  nodes_.push_back({std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Matrix value, const std::vector<Var>& parents, Backward backward) {
  bool needs = false;
  for (const Var& p : parents) {
    require(p.tape() == this, ErrorCode::invalid_argument, "Var from a different tape");
    needs = needs || nodes_[p.id()].needs_grad;
  }
  nodes_.push_back({std::move(value), Matrix(), needs, false, needs ? std::move(backward) : nullptr});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& output) {
  require(output.tape() == this, ErrorCode::invalid_argument, "backward on a foreign Var");
  const Matrix& v = nodes_[output.id()].value;
  require(v.rows() == 1 && v.cols() == 1, ErrorCode::dimension_mismatch, "backward needs a scalar output");
  for (auto& node : nodes_) {
    node.grad_set = false;
    node.grad.resize(0, 0);
  }
  accumulate(output.id(), Matrix::Ones(1, 1));
  for (std::size_t i = output.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (node.grad_set && node.backward) node.backward(*this, i);
  }
}

bool Tape::has_grad(const Var& v) const { return nodes_[v.id()].grad_set; }

Matrix Tape::grad(const Var& v) const {
  const Node& node = nodes_[v.id()];
  if (!node.grad_set) return Matrix::Zero(node.value.rows(), node.value.cols());
  return node.grad;
}

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::relu: return "relu";
    case Activation::identity: return "identity";
  }
  return "identity";
}

Activation parse_activation(std::string_view name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "relu") return Activation::relu;
  if (name == "identity" || name == "linear") return Activation::identity;
  fail(ErrorCode::parse, "unknown activation '" + std::string(name) + "'");
}

namespace ad {
namespace {

void same_shape(const Var& a, const Var& b, const char* op) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), ErrorCode::dimension_mismatch,
          std::string(op) + ": shape " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
              " vs " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
}

double stable_softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }
double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename Fn, typename Deriv>
Var unary(const Var& a, Fn fn, Deriv deriv) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value().unaryExpr(fn);
  return t.record(std::move(out), {a}, [ia, deriv](Tape& tape, std::size_t self) {
    const Matrix& x = tape.value_of(ia);
    const Matrix& y = tape.value_of(self);
    Matrix local(x.rows(), x.cols());
    for (Index i = 0; i < x.size(); ++i) local(i) = deriv(x(i), y(i));
    tape.accumulate(ia, tape.grad_of(self).cwiseProduct(local));
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  require(a.cols() == b.rows(), ErrorCode::dimension_mismatch,
          "matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
              std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() * b.value(), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    if (tape.needs_grad(ia)) tape.accumulate(ia, g * tape.value_of(ib).transpose());
    if (tape.needs_grad(ib)) tape.accumulate(ib, tape.value_of(ia).transpose() * g);
  });
}

Var add(const Var& a, const Var& b) {
  same_shape(a, b, "add");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() + b.value(), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self));
    tape.accumulate(ib, tape.grad_of(self));
  });
}

Var sub(const Var& a, const Var& b) {
  same_shape(a, b, "sub");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value() - b.value(), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self));
    tape.accumulate(ib, -tape.grad_of(self));
  });
}

Var hadamard(const Var& a, const Var& b) {
  same_shape(a, b, "hadamard");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [ia, ib](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    if (tape.needs_grad(ia)) tape.accumulate(ia, g.cwiseProduct(tape.value_of(ib)));
    if (tape.needs_grad(ib)) tape.accumulate(ib, g.cwiseProduct(tape.value_of(ia)));
  });
}

Var scale(const Var& a, double factor) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value() * factor, {a}, [ia, factor](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self) * factor);
  });
}

Var add_scalar(const Var& a, double value) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value().array() + value, {a}, [ia](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self));
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var transpose(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(a.value().transpose(), {a}, [ia](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self).transpose());
  });
}

Var add_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), ErrorCode::dimension_mismatch,
          "add_row: row must be 1x" + std::to_string(a.cols()));
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ir = row.id();
  Matrix out = a.value().rowwise() + row.value().row(0);
  return t.record(std::move(out), {a, row}, [ia, ir](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    tape.accumulate(ia, g);
    if (tape.needs_grad(ir)) tape.accumulate(ir, g.colwise().sum());
  });
}

Var mul_row(const Var& a, const Var& row) {
  require(row.rows() == 1 && row.cols() == a.cols(), ErrorCode::dimension_mismatch,
          "mul_row: row must be 1x" + std::to_string(a.cols()));
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ir = row.id();
  Matrix out = a.value().array().rowwise() * row.value().row(0).array();
  return t.record(std::move(out), {a, row}, [ia, ir](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    if (tape.needs_grad(ia))
      tape.accumulate(ia, Matrix(g.array().rowwise() * tape.value_of(ir).row(0).array()));
    if (tape.needs_grad(ir)) tape.accumulate(ir, g.cwiseProduct(tape.value_of(ia)).colwise().sum());
  });
}

Var mul_col(const Var& a, const Var& col) {
  require(col.cols() == 1 && col.rows() == a.rows(), ErrorCode::dimension_mismatch,
          "mul_col: column must be " + std::to_string(a.rows()) + "x1");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ic = col.id();
  Matrix out = a.value().array().colwise() * col.value().col(0).array();
  return t.record(std::move(out), {a, col}, [ia, ic](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    if (tape.needs_grad(ia))
      tape.accumulate(ia, Matrix(g.array().colwise() * tape.value_of(ic).col(0).array()));
    if (tape.needs_grad(ic)) tape.accumulate(ic, g.cwiseProduct(tape.value_of(ia)).rowwise().sum());
  });
}

Var sigmoid(const Var& a) {
  return unary(a, [](double x) { return stable_sigmoid(x); },
               [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(const Var& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(const Var& a) {
  return unary(a, [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(const Var& a) {
  return unary(a, [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var sqrt(const Var& a) {
  return unary(a, [](double x) { return std::sqrt(x); },
               [](double, double y) { return y > 0.0 ? 0.5 / y : 0.0; });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sin(const Var& a) {
  return unary(a, [](double x) { return std::sin(x); }, [](double x, double) { return std::cos(x); });
}

Var cos(const Var& a) {
  return unary(a, [](double x) { return std::cos(x); }, [](double x, double) { return -std::sin(x); });
}

Var softplus(const Var& a) {
  return unary(a, [](double x) { return stable_softplus(x); },
               [](double x, double) { return stable_sigmoid(x); });
}

Var log_sigmoid(const Var& a) {
  return unary(a, [](double x) { return -stable_softplus(-x); },
               [](double x, double) { return stable_sigmoid(-x); });
}

Var activate(const Var& a, Activation activation) {
  switch (activation) {
    case Activation::sigmoid: return sigmoid(a);
    case Activation::tanh: return tanh(a);
    case Activation::relu: return relu(a);
    case Activation::identity: return a;
  }
  return a;
}

Var sum(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows(), c = a.cols();
  return t.record(Matrix::Constant(1, 1, a.value().sum()), {a}, [ia, r, c](Tape& tape, std::size_t self) {
    tape.accumulate(ia, Matrix::Constant(r, c, tape.grad_of(self)(0, 0)));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.value().size());
  require(n > 0, ErrorCode::invalid_argument, "mean of an empty matrix");
  return scale(sum(a), 1.0 / n);
}

Var sum_cols(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index c = a.cols();
  return t.record(a.value().rowwise().sum(), {a}, [ia, c](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self).replicate(1, c));
  });
}

Var sum_rows(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows();
  return t.record(a.value().colwise().sum(), {a}, [ia, r](Tape& tape, std::size_t self) {
    tape.accumulate(ia, tape.grad_of(self).replicate(r, 1));
  });
}

Var mean_rows(const Var& a) {
  require(a.rows() > 0, ErrorCode::invalid_argument, "mean_rows of an empty matrix");
  return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows()));
}

Var max_rows(const Var& a) {
  require(a.rows() > 0, ErrorCode::invalid_argument, "max_rows of an empty matrix");
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  std::vector<Index> arg(static_cast<std::size_t>(x.cols()));
  Matrix out(1, x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    Index best = 0;
    for (Index i = 1; i < x.rows(); ++i)
      if (x(i, j) > x(best, j)) best = i;
    arg[static_cast<std::size_t>(j)] = best;
    out(0, j) = x(best, j);
  }
  const Index r = x.rows();
  return t.record(std::move(out), {a}, [ia, arg, r](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    Matrix local = Matrix::Zero(r, g.cols());
    for (Index j = 0; j < g.cols(); ++j) local(arg[static_cast<std::size_t>(j)], j) = g(0, j);
    tape.accumulate(ia, local);
  });
}

Var row_dot(const Var& a, const Var& b) {
  same_shape(a, b, "row_dot");
  Tape& t = *a.tape();
  const std::size_t ia = a.id(), ib = b.id();
  return t.record(a.value().cwiseProduct(b.value()).rowwise().sum(), {a, b},
                  [ia, ib](Tape& tape, std::size_t self) {
                    const Matrix& g = tape.grad_of(self);
                    if (tape.needs_grad(ia))
                      tape.accumulate(ia, Matrix(tape.value_of(ib).array().colwise() * g.col(0).array()));
                    if (tape.needs_grad(ib))
                      tape.accumulate(ib, Matrix(tape.value_of(ia).array().colwise() * g.col(0).array()));
                  });
}

Var softmax_rows(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  Matrix out = a.value();
  for (Index i = 0; i < out.rows(); ++i) {
    const double m = out.row(i).maxCoeff();
    out.row(i) = (out.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return t.record(std::move(out), {a}, [ia](Tape& tape, std::size_t self) {
    const Matrix& y = tape.value_of(self);
    const Matrix& g = tape.grad_of(self);
    Matrix local(y.rows(), y.cols());
    for (Index i = 0; i < y.rows(); ++i) {
      const double dot = g.row(i).dot(y.row(i));
      local.row(i) = y.row(i).array() * (g.row(i).array() - dot);
    }
    tape.accumulate(ia, local);
  });
}

Var gather_rows(const Var& a, const std::vector<Index>& rows) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Matrix& x = a.value();
  Matrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < x.rows(), ErrorCode::invalid_argument, "gather_rows: index out of range");
    out.row(static_cast<Index>(i)) = x.row(rows[i]);
  }
  const Index r = x.rows(), c = x.cols();
  return t.record(std::move(out), {a}, [ia, rows, r, c](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    Matrix local = Matrix::Zero(r, c);
    for (std::size_t i = 0; i < rows.size(); ++i) local.row(rows[i]) += g.row(static_cast<Index>(i));
    tape.accumulate(ia, local);
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.cols(), ErrorCode::invalid_argument,
          "slice_cols out of range");
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows(), c = a.cols();
  return t.record(a.value().middleCols(start, count), {a}, [ia, r, c, start, count](Tape& tape, std::size_t self) {
    Matrix local = Matrix::Zero(r, c);
    local.middleCols(start, count) = tape.grad_of(self);
    tape.accumulate(ia, local);
  });
}

Var slice_rows(const Var& a, Index start, Index count) {
  require(start >= 0 && count >= 0 && start + count <= a.rows(), ErrorCode::invalid_argument,
          "slice_rows out of range");
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index r = a.rows(), c = a.cols();
  return t.record(a.value().middleRows(start, count), {a}, [ia, r, c, start, count](Tape& tape, std::size_t self) {
    Matrix local = Matrix::Zero(r, c);
    local.middleRows(start, count) = tape.grad_of(self);
    tape.accumulate(ia, local);
  });
}

Var concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), ErrorCode::invalid_argument, "concat_cols of nothing");
  Tape& t = *parts.front().tape();
  const Index r = parts.front().rows();
  Index total = 0;
  for (const auto& p : parts) {
    require(p.rows() == r, ErrorCode::dimension_mismatch, "concat_cols: row counts differ");
    total += p.cols();
  }
  Matrix out(r, total);
  std::vector<std::pair<std::size_t, Index>> layout;
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    layout.emplace_back(p.id(), offset);
    offset += p.cols();
  }
  return t.record(std::move(out), parts, [layout](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    for (const auto& [id, off] : layout)
      if (tape.needs_grad(id)) tape.accumulate(id, g.middleCols(off, tape.value_of(id).cols()));
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  require(!parts.empty(), ErrorCode::invalid_argument, "concat_rows of nothing");
  Tape& t = *parts.front().tape();
  const Index c = parts.front().cols();
  Index total = 0;
  for (const auto& p : parts) {
    require(p.cols() == c, ErrorCode::dimension_mismatch, "concat_rows: column counts differ");
    total += p.rows();
  }
  Matrix out(total, c);
  std::vector<std::pair<std::size_t, Index>> layout;
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    layout.emplace_back(p.id(), offset);
    offset += p.rows();
  }
  return t.record(std::move(out), parts, [layout](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    for (const auto& [id, off] : layout)
      if (tape.needs_grad(id)) tape.accumulate(id, g.middleRows(off, tape.value_of(id).rows()));
  });
}

Var unfold_rows(const Var& a, Index width) {
  const Index n = a.rows(), c = a.cols();
  require(width >= 1 && width <= n, ErrorCode::invalid_argument,
          "unfold_rows: width " + std::to_string(width) + " exceeds " + std::to_string(n) + " rows");
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  const Index windows = n - width + 1;
  Matrix out(windows, width * c);
  const Matrix& x = a.value();
  for (Index p = 0; p < windows; ++p)
    for (Index k = 0; k < width; ++k) out.block(p, k * c, 1, c) = x.row(p + k);
  return t.record(std::move(out), {a}, [ia, n, c, width, windows](Tape& tape, std::size_t self) {
    const Matrix& g = tape.grad_of(self);
    Matrix local = Matrix::Zero(n, c);
    for (Index p = 0; p < windows; ++p)
      for (Index k = 0; k < width; ++k) local.row(p + k) += g.block(p, k * c, 1, c);
    tape.accumulate(ia, local);
  });
}

Var bce_with_logits(const Var& logits, const Matrix& labels) {
  return bce_with_logits(logits, labels, Matrix::Ones(labels.rows(), labels.cols()));
}

Var bce_with_logits(const Var& logits, const Matrix& labels, const Matrix& weights) {
  require(labels.rows() == logits.rows() && labels.cols() == logits.cols() &&
              weights.rows() == labels.rows() && weights.cols() == labels.cols(),
          ErrorCode::dimension_mismatch, "bce_with_logits: shape mismatch");
  Tape& t = *logits.tape();
  const std::size_t il = logits.id();
  const Matrix& z = logits.value();
  double total = 0.0;
  for (Index i = 0; i < z.size(); ++i) total += weights(i) * (stable_softplus(z(i)) - labels(i) * z(i));
  return t.record(Matrix::Constant(1, 1, total), {logits}, [il, labels, weights](Tape& tape, std::size_t self) {
    const Matrix& zz = tape.value_of(il);
    const double g = tape.grad_of(self)(0, 0);
    Matrix local(zz.rows(), zz.cols());
    for (Index i = 0; i < zz.size(); ++i) local(i) = g * weights(i) * (stable_sigmoid(zz(i)) - labels(i));
    tape.accumulate(il, local);
  });
}

Var squared_error(const Var& a, const Matrix& target) {
  require(target.rows() == a.rows() && target.cols() == a.cols(), ErrorCode::dimension_mismatch,
          "squared_error: shape mismatch");
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(Matrix::Constant(1, 1, (a.value() - target).squaredNorm()), {a},
                  [ia, target](Tape& tape, std::size_t self) {
                    tape.accumulate(ia, 2.0 * tape.grad_of(self)(0, 0) * (tape.value_of(ia) - target));
                  });
}

Var squared_norm(const Var& a) {
  Tape& t = *a.tape();
  const std::size_t ia = a.id();
  return t.record(Matrix::Constant(1, 1, a.value().squaredNorm()), {a}, [ia](Tape& tape, std::size_t self) {
    tape.accumulate(ia, 2.0 * tape.grad_of(self)(0, 0) * tape.value_of(ia));
  });
}

}  // namespace ad
}  // namespace repositioner::num
