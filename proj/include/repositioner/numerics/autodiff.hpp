#pragma once

#include "repositioner/common.hpp"

#include <deque>
#include <functional>
#include <initializer_list>
#include <string>
#include <vector>

// Reverse-mode differentiation over dense matrices. A Tape records every
// operation of one forward pass; backward() walks it in reverse.
namespace repositioner::num {

class Tape;

class Var {
 public:
  Var() = default;

  const Matrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }
  double scalar() const;

  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix value);
  Var variable(Matrix value);
  Var scalar_constant(double value);

  // Seeds d(output)/d(output) = 1; output must be 1x1.
  void backward(const Var& output);

  bool has_grad(const Var& v) const;
  // Zero matrix of the right shape when the node was never reached.
  Matrix grad(const Var& v) const;

  std::size_t size() const { return nodes_.size(); }

  // Operation plumbing.
  Var record(Matrix value, std::initializer_list<Var> parents, Backward backward);
  Var record(Matrix value, const std::vector<Var>& parents, Backward backward);
  const Matrix& value_of(std::size_t id) const { return nodes_[id].value; }
  const Matrix& grad_of(std::size_t id) const { return nodes_[id].grad; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }

  template <typename Expr>
  void accumulate(std::size_t id, const Expr& contribution) {
    Node& node = nodes_[id];
    if (!node.needs_grad) return;
    if (!node.grad_set) {
      node.grad = contribution;
      node.grad_set = true;
    } else {
      node.grad += contribution;
    }
  }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool needs_grad = false;
    bool grad_set = false;
    Backward backward;
  };
  std::deque<Node> nodes_;
};

enum class Activation { sigmoid, tanh, relu, identity };

std::string_view to_string(Activation a);
Activation parse_activation(std::string_view name);

namespace ad {

Var matmul(const Var& a, const Var& b);
Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var hadamard(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var add_scalar(const Var& a, double value);
Var neg(const Var& a);
Var transpose(const Var& a);

// a (n x c) + row (1 x c) broadcast over rows.
Var add_row(const Var& a, const Var& row);
// a (n x c) .* row (1 x c) broadcast over rows.
Var mul_row(const Var& a, const Var& row);
// a (n x c) .* col (n x 1) broadcast over columns.
Var mul_col(const Var& a, const Var& col);

Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var relu(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var sqrt(const Var& a);
Var square(const Var& a);
Var sin(const Var& a);
Var cos(const Var& a);
Var softplus(const Var& a);
Var log_sigmoid(const Var& a);
Var activate(const Var& a, Activation activation);

Var sum(const Var& a);             // -> 1x1
Var mean(const Var& a);            // -> 1x1
Var sum_cols(const Var& a);        // n x c -> n x 1
Var sum_rows(const Var& a);        // n x c -> 1 x c
Var mean_rows(const Var& a);       // n x c -> 1 x c
Var max_rows(const Var& a);        // n x c -> 1 x c, columnwise max
Var row_dot(const Var& a, const Var& b);  // n x c, n x c -> n x 1
Var softmax_rows(const Var& a);

Var gather_rows(const Var& a, const std::vector<Index>& rows);
Var slice_cols(const Var& a, Index start, Index count);
Var slice_rows(const Var& a, Index start, Index count);
Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);

// Sliding windows: row p of the result is rows p..p+width-1 of `a` laid out
// side by side, giving (n - width + 1) x (width * c).
Var unfold_rows(const Var& a, Index width);

// sum(softplus(z) - y .* z) with optional per-entry weights.
Var bce_with_logits(const Var& logits, const Matrix& labels);
Var bce_with_logits(const Var& logits, const Matrix& labels, const Matrix& weights);
// sum((a - target)^2)
Var squared_error(const Var& a, const Matrix& target);
// sum of squares of every entry.
Var squared_norm(const Var& a);

}  // namespace ad
}  // namespace repositioner::num
