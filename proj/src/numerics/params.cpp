#include "repositioner/numerics/params.hpp"

#include <cmath>

namespace repositioner::num {

void ParamSet::add(const std::string& name, Matrix value) {
  require(!contains(name), ErrorCode::conflict, "duplicate parameter '" + name + "'");
  names_.push_back(name);
  values_.push_back(std::move(value));
}

bool ParamSet::contains(const std::string& name) const {
  for (const auto& n : names_)
    if (n == name) return true;
  return false;
}

std::size_t ParamSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names_.size(); ++i)
    if (names_[i] == name) return i;
  fail(ErrorCode::not_found, "no parameter named '" + name + "'");
}

Matrix& ParamSet::get(const std::string& name) { return values_[index_of(name)]; }
const Matrix& ParamSet::get(const std::string& name) const { return values_[index_of(name)]; }

Index ParamSet::scalar_count() const {
  Index n = 0;
  for (const auto& v : values_) n += v.size();
  return n;
}

Vector ParamSet::flatten() const {
  Vector flat(scalar_count());
  Index offset = 0;
  for (const auto& v : values_) {
    flat.segment(offset, v.size()) = Eigen::Map<const Vector>(v.data(), v.size());
    offset += v.size();
  }
  return flat;
}

void ParamSet::assign_flat(const Vector& flat) {
  require(flat.size() == scalar_count(), ErrorCode::dimension_mismatch, "assign_flat: size mismatch");
  Index offset = 0;
  for (auto& v : values_) {
    Eigen::Map<Vector>(v.data(), v.size()) = flat.segment(offset, v.size());
    offset += v.size();
  }
}

BoundParams bind(Tape& tape, const ParamSet& params) {
  BoundParams out;
  out.source = &params;
  out.vars.reserve(params.size());
  for (const auto& v : params.values()) out.vars.push_back(tape.variable(v));
  return out;
}

std::vector<Matrix> BoundParams::grads(const Tape& tape, std::vector<bool>* touched) const {
  std::vector<Matrix> out;
  out.reserve(vars.size());
  if (touched) touched->assign(vars.size(), false);
  for (std::size_t i = 0; i < vars.size(); ++i) {
    out.push_back(tape.grad(vars[i]));
    if (touched) (*touched)[i] = tape.has_grad(vars[i]);
  }
  return out;
}

AdamState make_adam_state(const std::vector<Matrix>& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.v.push_back(Matrix::Zero(p.rows(), p.cols()));
    s.steps.push_back(0);
  }
  return s;
}

void adam_step(std::vector<Matrix>& params, const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config, const std::vector<bool>* active) {
  require(config.lr > 0, ErrorCode::invalid_argument, "adam_step: learning rate must be positive");
  require(params.size() == grads.size() && params.size() == state.m.size(), ErrorCode::dimension_mismatch,
          "adam_step: parameter/gradient/state counts differ");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (active && !(*active)[i]) continue;
    require(params[i].rows() == grads[i].rows() && params[i].cols() == grads[i].cols() &&
                state.m[i].rows() == params[i].rows() && state.m[i].cols() == params[i].cols(),
            ErrorCode::dimension_mismatch, "adam_step: shape mismatch at parameter " + std::to_string(i));
    const long long t = ++state.steps[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * grads[i];
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * grads[i].cwiseAbs2();
    const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
    const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
    params[i].array() -= config.lr * (state.m[i].array() / c1) / ((state.v[i].array() / c2).sqrt() + config.eps);
  }
}

DescentResult minimize_monotone(ParamSet& params, const Objective& objective, const DescentOptions& options) {
  DescentResult result;
  AdamState state = make_adam_state(params.values());
  std::vector<Matrix> grads;
  double loss = objective(params, &grads);
  require(std::isfinite(loss), ErrorCode::non_finite, "objective is not finite at the initial point");
  result.history.push_back(loss);
  AdamConfig config = options.adam;

  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    const std::vector<Matrix> saved = params.values();
    const AdamState saved_state = state;
    bool accepted = false;
    std::vector<Matrix> next_grads;
    for (int attempt = 0; attempt <= options.max_backtracks; ++attempt) {
      adam_step(params.values(), grads, state, config);
      const double next = objective(params, &next_grads);
      if (std::isfinite(next) && next <= loss) {
        loss = next;
        accepted = true;
        break;
      }
      ++result.rejected_steps;
      params.values() = saved;
      state = saved_state;
      config.lr *= 0.5;
    }
    if (!accepted) {
      result.stalled = true;
      break;
    }
    grads = std::move(next_grads);
    result.history.push_back(loss);
    if (options.on_accept) options.on_accept(params, loss);
    config.lr = std::min(options.adam.lr, config.lr * 1.25);
  }
  return result;
}

double finite_diff_check(const std::function<double(const Vector&)>& fn, const Vector& point,
                         const Vector& analytic, double h) {
  require(point.size() == analytic.size(), ErrorCode::dimension_mismatch, "finite_diff_check: size mismatch");
  require(point.allFinite(), ErrorCode::non_finite, "finite_diff_check: non-finite point");
  double worst = 0.0;
  Vector x = point;
  for (Index i = 0; i < point.size(); ++i) {
    x(i) = point(i) + h;
    const double up = fn(x);
    x(i) = point(i) - h;
    const double down = fn(x);
    x(i) = point(i);
    require(std::isfinite(up) && std::isfinite(down), ErrorCode::non_finite,
            "finite_diff_check: non-finite evaluation at coordinate " + std::to_string(i));
    const double numeric = (up - down) / (2.0 * h);
    const double err = std::abs(numeric - analytic(i)) / std::max(1.0, std::abs(analytic(i)));
    worst = std::max(worst, err);
  }
  return worst;
}

double gradient_check(const ParamSet& params, const Objective& objective, double h) {
  ParamSet work = params;
  std::vector<Matrix> grads;
  objective(work, &grads);
  Vector analytic(work.scalar_count());
  Index offset = 0;
  for (const auto& g : grads) {
    analytic.segment(offset, g.size()) = Eigen::Map<const Vector>(g.data(), g.size());
    offset += g.size();
  }
  const Vector point = work.flatten();
  return finite_diff_check(
      [&](const Vector& x) {
        work.assign_flat(x);
        return objective(work, nullptr);
      },
      point, analytic, h);
}

}  // namespace repositioner::num
