#pragma once

#include "repositioner/common.hpp"
#include "repositioner/numerics/autodiff.hpp"

#include <functional>
#include <string>
#include <vector>

namespace repositioner::num {

// Named, ordered collection of trainable matrices.
class ParamSet {
 public:
  void add(const std::string& name, Matrix value);
  bool contains(const std::string& name) const;
  Matrix& get(const std::string& name);
  const Matrix& get(const std::string& name) const;
  std::size_t index_of(const std::string& name) const;

  std::size_t size() const { return values_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Matrix>& values() { return values_; }
  const std::vector<Matrix>& values() const { return values_; }

  Index scalar_count() const;
  Vector flatten() const;
  void assign_flat(const Vector& flat);

  bool operator==(const ParamSet& other) const {
    return names_ == other.names_ && values_ == other.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
};

// Tape leaves for every parameter, in ParamSet order.
struct BoundParams {
  std::vector<Var> vars;
  const ParamSet* source = nullptr;

  const Var& operator[](const std::string& name) const { return vars.at(source->index_of(name)); }

  // Gradients after backward(); untouched parameters get zeros and
  // `touched[i] = false`.
  std::vector<Matrix> grads(const Tape& tape, std::vector<bool>* touched = nullptr) const;
};

BoundParams bind(Tape& tape, const ParamSet& params);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::vector<long long> steps;
};

AdamState make_adam_state(const std::vector<Matrix>& params);

// One bias-corrected Adam update. Parameters with `active[i] == false` are
// left untouched, including their moments and step counter.
void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config, const std::vector<bool>* active = nullptr);

// Objective evaluated at the current parameters; fills `grads` when non-null.
using Objective = std::function<double(const ParamSet&, std::vector<Matrix>* grads)>;

struct DescentOptions {
  AdamConfig adam;
  int epochs = 100;
  int max_backtracks = 30;
  // Called after every accepted epoch with the new objective value.
  std::function<void(const ParamSet&, double)> on_accept;
};

struct DescentResult {
  std::vector<double> history;  // objective before training, then after each accepted epoch
  int rejected_steps = 0;
  bool stalled = false;         // stopped early because no step could decrease the objective
};

// Full-batch Adam with step rejection: an update that would increase the
// objective is undone and retried with half the learning rate, so `history`
// is non-increasing by construction.
DescentResult minimize_monotone(ParamSet& params, const Objective& objective, const DescentOptions& options);

// Central differences with step h; returns max over coordinates of
// |numeric - analytic| / max(1, |analytic|).
double finite_diff_check(const std::function<double(const Vector&)>& fn, const Vector& point,
                         const Vector& analytic, double h = 1e-5);

// finite_diff_check over every scalar of `params`.
double gradient_check(const ParamSet& params, const Objective& objective, double h = 1e-5);

}  // namespace repositioner::num
